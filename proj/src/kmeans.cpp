#include "regionlift/kmeans.hpp"

#include <limits>
#include <stdexcept>

#include "regionlift/random.hpp"

namespace regionlift {

namespace {

double squared_distance(const double* a, const double* b, Eigen::Index dim) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

RowMatrix seed_plus_plus(const RowMatrix& data, int k, Rng& rng) {
  const Eigen::Index n = data.rows();
  const Eigen::Index dim = data.cols();
  RowMatrix centers(k, dim);
  std::vector<double> closest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<bool> taken(static_cast<std::size_t>(n), false);

  Eigen::Index pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
  for (int c = 0; c < k; ++c) {
    if (c > 0) {
      double total = 0.0;
      for (double d : closest) total += d;
      if (total > 0.0) {
        double target = rng.uniform() * total;
        pick = n - 1;
        for (Eigen::Index i = 0; i < n; ++i) {
          target -= closest[static_cast<std::size_t>(i)];
          if (target < 0.0 && closest[static_cast<std::size_t>(i)] > 0.0) {
            pick = i;
            break;
          }
        }
      } else {
        // Every point coincides with a chosen centre; take an unused row.
        std::uint64_t skip = rng.below(static_cast<std::uint64_t>(n - c));
        for (Eigen::Index i = 0; i < n; ++i) {
          if (taken[static_cast<std::size_t>(i)]) continue;
          if (skip-- == 0) {
            pick = i;
            break;
          }
        }
      }
    }
    taken[static_cast<std::size_t>(pick)] = true;
    centers.row(c) = data.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = squared_distance(data.row(i).data(), centers.row(c).data(), dim);
      closest[static_cast<std::size_t>(i)] = std::min(closest[static_cast<std::size_t>(i)], d);
    }
  }
  return centers;
}

}  // namespace

int nearest_center(const Codebook& codebook, const double* x) {
  const RowMatrix& c = codebook.centers;
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < c.rows(); ++j) {
    const double d = squared_distance(x, c.row(j).data(), c.cols());
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(j);
    }
  }
  return best;
}

KMeansResult kmeans_train(const RowMatrix& data, const KMeansParams& params) {
  if (params.clusters < 1) throw std::invalid_argument("k-means needs at least one cluster");
  if (data.rows() < params.clusters) {
    throw std::invalid_argument("k-means needs at least as many points as clusters (" +
                                std::to_string(data.rows()) + " < " +
                                std::to_string(params.clusters) + ")");
  }
  if (!data.allFinite()) throw std::invalid_argument("k-means input contains non-finite values");

  const Eigen::Index n = data.rows();
  const Eigen::Index dim = data.cols();
  const int k = params.clusters;
  Rng rng(params.seed);

  KMeansResult result;
  result.codebook.centers = seed_plus_plus(data, k, rng);
  RowMatrix& centers = result.codebook.centers;
  result.assignment.assign(static_cast<std::size_t>(n), 0);
  std::vector<double> dist(static_cast<std::size_t>(n), 0.0);

  for (int iter = 0; iter < std::max(1, params.max_iters); ++iter) {
    double objective = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = nearest_center(result.codebook, data.row(i).data());
      result.assignment[static_cast<std::size_t>(i)] = c;
      dist[static_cast<std::size_t>(i)] = squared_distance(data.row(i).data(), centers.row(c).data(), dim);
      objective += dist[static_cast<std::size_t>(i)];
    }
    const double previous = result.objective.empty() ? 0.0 : result.objective.back();
    result.objective.push_back(objective);
    if (objective == 0.0) break;
    if (result.objective.size() > 1 && previous - objective <= params.tol * previous) break;
    if (iter + 1 == params.max_iters) break;

    RowMatrix sums = RowMatrix::Zero(k, dim);
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = result.assignment[static_cast<std::size_t>(i)];
      sums.row(c) += data.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
        continue;
      }
      Eigen::Index far = 0;
      for (Eigen::Index i = 1; i < n; ++i) {
        if (dist[static_cast<std::size_t>(i)] > dist[static_cast<std::size_t>(far)]) far = i;
      }
      centers.row(c) = data.row(far);
      dist[static_cast<std::size_t>(far)] = 0.0;
    }
  }
  return result;
}

}  // namespace regionlift
