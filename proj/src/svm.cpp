#include "regionlift/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "regionlift/random.hpp"

namespace regionlift {

double KernelSpec::operator()(const double* a, const double* b, std::size_t dim) const {
  if (kind == KernelKind::linear) {
    double s = 0.0;
    for (std::size_t i = 0; i < dim; ++i) s += a[i] * b[i];
    return s;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::exp(-gamma * s);
}

RowMatrix kernel_matrix(const RowMatrix& samples, const KernelSpec& kernel) {
  const Eigen::Index n = samples.rows();
  const auto dim = static_cast<std::size_t>(samples.cols());
  RowMatrix gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = kernel(samples.row(i).data(), samples.row(j).data(), dim);
      gram(i, j) = v;
      gram(j, i) = v;
    }
  }
  return gram;
}

namespace {

constexpr double kAlphaEps = 1e-12;

void validate(const RowMatrix& samples, std::span<const int> labels, const KernelSpec& kernel,
              const SmoParams& params) {
  if (static_cast<std::size_t>(samples.rows()) != labels.size()) {
    throw std::invalid_argument("sample/label count mismatch");
  }
  bool pos = false;
  bool neg = false;
  for (int y : labels) {
    if (y == 1) pos = true;
    else if (y == -1) neg = true;
    else throw std::invalid_argument("SVM labels must be -1 or +1");
  }
  if (!pos || !neg) throw std::invalid_argument("SVM training needs samples of both labels");
  if (!samples.allFinite()) throw std::invalid_argument("SVM features must be finite");
  if (!(params.C > 0.0)) throw std::invalid_argument("SVM C must be positive");
  if (kernel.kind == KernelKind::rbf && !(kernel.gamma > 0.0 && std::isfinite(kernel.gamma))) {
    throw std::invalid_argument("RBF gamma must be finite and positive");
  }
}

class SmoSolver {
 public:
  SmoSolver(const RowMatrix& gram, std::span<const int> labels, const SmoParams& params)
      : gram_(gram), y_(labels), p_(params), rng_(params.seed),
        alpha_(labels.size(), 0.0), error_(labels.size()) {
    for (std::size_t i = 0; i < y_.size(); ++i) error_[i] = -y_[i];
  }

  SmoSolution run() {
    const std::size_t n = y_.size();
    int passes = 0;
    int sweeps = 0;
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    while (passes < p_.max_passes && sweeps < p_.max_sweeps) {
      int changed = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!violates(i)) continue;
        std::size_t j = rng_.below(n - 1);
        if (j >= i) ++j;
        if (step(i, j)) {
          ++changed;
          continue;
        }
        const std::size_t start = rng_.below(n);
        for (std::size_t t = 0; t < n; ++t) {
          j = (start + t) % n;
          if (j != i && step(i, j)) {
            ++changed;
            break;
          }
        }
      }
      ++sweeps;
      passes = changed == 0 ? passes + 1 : 0;
      if (passes == p_.max_passes) {
        refit_bias();
        if (std::none_of(idx.begin(), idx.end(), [&](std::size_t i) { return violates(i); })) break;
        passes = 0;
      }
    }
    return {alpha_, bias_, sweeps};
  }

 private:
  bool violates(std::size_t i) const {
    const double r = y_[i] * error_[i];
    return (r < -p_.tol && alpha_[i] < p_.C) || (r > p_.tol && alpha_[i] > 0.0);
  }

  // Picks the bias from the interval allowed by the KKT conditions at the
  // current multipliers: the mean over free multipliers when there are any,
  // otherwise the midpoint.
  void refit_bias() {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    int free = 0;
    for (std::size_t i = 0; i < y_.size(); ++i) {
      const double y = y_[i];
      const double target = y - (error_[i] + y - bias_);
      if (alpha_[i] > 0.0 && alpha_[i] < p_.C) {
        free_sum += target;
        ++free;
      }
      // a < C needs y f >= 1, a > 0 needs y f <= 1
      const bool raise_lo = (alpha_[i] < p_.C && y > 0) || (alpha_[i] > 0.0 && y < 0);
      const bool lower_hi = (alpha_[i] < p_.C && y < 0) || (alpha_[i] > 0.0 && y > 0);
      if (raise_lo) lo = std::max(lo, target);
      if (lower_hi) hi = std::min(hi, target);
    }
    double b = free > 0 ? free_sum / free : bias_;
    if (free == 0 && std::isfinite(lo) && std::isfinite(hi)) b = 0.5 * (lo + hi);
    else if (free == 0 && std::isfinite(lo)) b = lo;
    else if (free == 0 && std::isfinite(hi)) b = hi;
    if (lo <= hi) b = std::clamp(b, lo, hi);
    const double db = b - bias_;
    for (double& e : error_) e += db;
    bias_ = b;
  }

  double snap(double a) const {
    if (a < kAlphaEps) return 0.0;
    if (a > p_.C - kAlphaEps) return p_.C;
    return a;
  }

  bool step(std::size_t i, std::size_t j) {
    const double yi = y_[i];
    const double yj = y_[j];
    const double ai = alpha_[i];
    const double aj = alpha_[j];
    double lo = 0.0;
    double hi = 0.0;
    if (yi != yj) {
      lo = std::max(0.0, aj - ai);
      hi = std::min(p_.C, p_.C + aj - ai);
    } else {
      lo = std::max(0.0, ai + aj - p_.C);
      hi = std::min(p_.C, ai + aj);
    }
    if (hi - lo < kAlphaEps) return false;
    const double kii = gram_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    const double kjj = gram_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
    const double kij = gram_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    const double eta = 2.0 * kij - kii - kjj;
    if (eta >= -kAlphaEps) return false;

    double aj_new = snap(std::clamp(aj - yj * (error_[i] - error_[j]) / eta, lo, hi));
    if (std::abs(aj_new - aj) < kAlphaEps * (1.0 + aj_new + aj)) return false;
    const double ai_new = snap(ai + yi * yj * (aj - aj_new));
    const double dai = ai_new - ai;
    const double daj = aj_new - aj;

    const double b1 = bias_ - error_[i] - yi * dai * kii - yj * daj * kij;
    const double b2 = bias_ - error_[j] - yi * dai * kij - yj * daj * kjj;
    double b_new = 0.5 * (b1 + b2);
    if (ai_new > 0.0 && ai_new < p_.C) b_new = b1;
    else if (aj_new > 0.0 && aj_new < p_.C) b_new = b2;

    const double db = b_new - bias_;
    for (std::size_t k = 0; k < y_.size(); ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      error_[k] += yi * dai * gram_(static_cast<Eigen::Index>(i), kk) +
                   yj * daj * gram_(static_cast<Eigen::Index>(j), kk) + db;
    }
    alpha_[i] = ai_new;
    alpha_[j] = aj_new;
    bias_ = b_new;
    return true;
  }

  const RowMatrix& gram_;
  std::span<const int> y_;
  SmoParams p_;
  Rng rng_;
  std::vector<double> alpha_;
  std::vector<double> error_;
  double bias_ = 0.0;
};

}  // namespace

SmoSolution smo_solve(const RowMatrix& samples, std::span<const int> labels,
                      const KernelSpec& kernel, const SmoParams& params) {
  validate(samples, labels, kernel, params);
  const RowMatrix gram = kernel_matrix(samples, kernel);
  return SmoSolver(gram, labels, params).run();
}

SvmModel smo_train(const RowMatrix& samples, std::span<const int> labels,
                   const KernelSpec& kernel, const SmoParams& params) {
  const SmoSolution sol = smo_solve(samples, labels, kernel, params);
  SvmModel model;
  model.kernel = kernel;
  model.bias = sol.bias;
  std::vector<Eigen::Index> support;
  for (std::size_t i = 0; i < sol.alpha.size(); ++i) {
    if (sol.alpha[i] > 0.0) support.push_back(static_cast<Eigen::Index>(i));
  }
  model.support_vectors.resize(static_cast<Eigen::Index>(support.size()), samples.cols());
  for (std::size_t s = 0; s < support.size(); ++s) {
    const auto i = support[s];
    model.support_vectors.row(static_cast<Eigen::Index>(s)) = samples.row(i);
    model.dual_coef.push_back(sol.alpha[static_cast<std::size_t>(i)] * labels[static_cast<std::size_t>(i)]);
  }
  if (kernel.kind == KernelKind::linear) {
    model.weights.assign(static_cast<std::size_t>(samples.cols()), 0.0);
    for (std::size_t s = 0; s < support.size(); ++s) {
      const double* sv = model.support_vectors.row(static_cast<Eigen::Index>(s)).data();
      for (std::size_t d = 0; d < model.weights.size(); ++d) model.weights[d] += model.dual_coef[s] * sv[d];
    }
  }
  return model;
}

double SvmModel::score_kernel_sum(std::span<const double> x) const {
  if (x.size() != dim()) {
    throw std::invalid_argument("SVM input has dimension " + std::to_string(x.size()) +
                                ", model expects " + std::to_string(dim()));
  }
  double s = bias;
  for (std::size_t i = 0; i < dual_coef.size(); ++i) {
    s += dual_coef[i] * kernel(support_vectors.row(static_cast<Eigen::Index>(i)).data(), x.data(), x.size());
  }
  return s;
}

double SvmModel::score(std::span<const double> x) const {
  if (kernel.kind != KernelKind::linear || weights.empty()) return score_kernel_sum(x);
  if (x.size() != weights.size()) {
    throw std::invalid_argument("SVM input has dimension " + std::to_string(x.size()) +
                                ", model expects " + std::to_string(weights.size()));
  }
  double s = bias;
  for (std::size_t i = 0; i < x.size(); ++i) s += weights[i] * x[i];
  return s;
}

double dual_objective(std::span<const double> alpha, std::span<const int> labels,
                      const RowMatrix& gram) {
  double linear = 0.0;
  double quad = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    linear += alpha[i];
    for (std::size_t j = 0; j < alpha.size(); ++j) {
      quad += alpha[i] * alpha[j] * labels[i] * labels[j] *
              gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return linear - 0.5 * quad;
}

double max_kkt_violation(const SvmModel& model, const SmoSolution& solution,
                         const RowMatrix& samples, std::span<const int> labels, double C) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const std::span<const double> x(samples.row(i).data(), static_cast<std::size_t>(samples.cols()));
    const double r = labels[idx] * model.score_kernel_sum(x) - 1.0;
    const double a = solution.alpha[idx];
    double v = 0.0;
    if (a < C) v = std::max(v, -r);
    if (a > 0.0) v = std::max(v, r);
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace regionlift
