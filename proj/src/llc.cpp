#include "regionlift/llc.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include <Eigen/LU>

namespace regionlift {

std::vector<double> SparseCode::dense(std::size_t codebook_size) const {
  std::vector<double> out(codebook_size, 0.0);
  for (std::size_t i = 0; i < index.size(); ++i) out[index[i]] = value[i];
  return out;
}

std::vector<std::uint32_t> nearest_centers(const Codebook& codebook, std::span<const double> x,
                                           int count) {
  const auto k = static_cast<std::uint32_t>(codebook.size());
  std::vector<double> dist(k);
  for (std::uint32_t j = 0; j < k; ++j) {
    const double* c = codebook.centers.row(j).data();
    double s = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
      const double d = x[t] - c[t];
      s += d * d;
    }
    dist[j] = s;
  }
  std::vector<std::uint32_t> order(k);
  std::iota(order.begin(), order.end(), 0u);
  const auto m = static_cast<std::ptrdiff_t>(std::min<std::uint32_t>(static_cast<std::uint32_t>(count), k));
  std::partial_sort(order.begin(), order.begin() + m, order.end(),
                    [&](std::uint32_t a, std::uint32_t b) {
                      return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
                    });
  order.resize(static_cast<std::size_t>(m));
  return order;
}

SparseCode llc_encode(std::span<const double> x, const Codebook& codebook,
                      const LlcParams& params) {
  if (x.size() != codebook.dim()) throw std::invalid_argument("descriptor/codebook dimension mismatch");
  if (params.neighbors < 1 || static_cast<std::size_t>(params.neighbors) > codebook.size()) {
    throw std::invalid_argument("LLC neighbours must lie in [1, codebook size]");
  }
  if (!(params.lambda >= 0.0)) throw std::invalid_argument("LLC lambda must be non-negative");

  SparseCode code;
  code.index = nearest_centers(codebook, x, params.neighbors);
  const auto m = static_cast<Eigen::Index>(code.index.size());
  if (m == 1) {
    code.value = {1.0};
    return code;
  }

  const Eigen::Map<const Eigen::RowVectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  Eigen::MatrixXd shifted(m, xv.size());
  for (Eigen::Index i = 0; i < m; ++i) shifted.row(i) = codebook.centers.row(code.index[i]) - xv;

  // [2G 1; 1' 0] [w; mu] = [0; 1] with G = Z Z' + lambda I.
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + 1, m + 1);
  kkt.topLeftCorner(m, m) = 2.0 * (shifted * shifted.transpose());
  kkt.topLeftCorner(m, m).diagonal().array() += 2.0 * params.lambda;
  kkt.block(0, m, m, 1).setOnes();
  kkt.block(m, 0, 1, m).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
  rhs(m) = 1.0;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  if (!lu.isInvertible()) {
    throw std::domain_error(
        "LLC local system is singular (coincident or affinely dependent neighbours); "
        "use lambda > 0");
  }
  const Eigen::VectorXd sol = lu.solve(rhs);
  const double total = sol.head(m).sum();
  code.value.resize(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) code.value[static_cast<std::size_t>(i)] = sol(i) / total;
  return code;
}

}  // namespace regionlift
