#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "regionlift/matrix.hpp"

namespace regionlift {

enum class KernelKind { linear, rbf };

struct KernelSpec {
  KernelKind kind = KernelKind::linear;
  double gamma = 0.0;  // rbf only: k(a, b) = exp(-gamma ||a - b||^2)

  static KernelSpec linear() { return {KernelKind::linear, 0.0}; }
  static KernelSpec rbf(double gamma) { return {KernelKind::rbf, gamma}; }
  double operator()(const double* a, const double* b, std::size_t dim) const;
  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

struct SmoParams {
  double C = 1.0;
  double tol = 1e-3;
  /// Consecutive sweeps without any multiplier change before stopping.
  int max_passes = 5;
  int max_sweeps = 10000;
  std::uint64_t seed = 0;
};

struct SvmModel {
  KernelSpec kernel;
  RowMatrix support_vectors;
  std::vector<double> dual_coef;  // alpha_i * y_i per support vector
  double bias = 0.0;
  std::vector<double> weights;    // collapsed primal weights, linear kernel only

  std::size_t dim() const { return static_cast<std::size_t>(support_vectors.cols()); }
  /// Uses the collapsed weights for linear models, the kernel sum otherwise.
  double score(std::span<const double> x) const;
  /// sum_i dual_coef_i k(sv_i, x) + bias regardless of kernel kind.
  double score_kernel_sum(std::span<const double> x) const;
};

/// Raw solver output: one multiplier per training sample.
struct SmoSolution {
  std::vector<double> alpha;
  double bias = 0.0;
  int sweeps = 0;
};

RowMatrix kernel_matrix(const RowMatrix& samples, const KernelSpec& kernel);

/// Simplified SMO: every KKT violator i is paired with a seeded random j,
/// falling back to a scan over all j when that pair cannot make progress.
/// Labels must be -1/+1 with both present; features must be finite.
SmoSolution smo_solve(const RowMatrix& samples, std::span<const int> labels,
                      const KernelSpec& kernel, const SmoParams& params);

SvmModel smo_train(const RowMatrix& samples, std::span<const int> labels,
                   const KernelSpec& kernel, const SmoParams& params);

/// W(alpha) = sum alpha - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.
double dual_objective(std::span<const double> alpha, std::span<const int> labels,
                      const RowMatrix& gram);

/// Largest KKT residual of a trained model on its training set, measured
/// on y f(x) - 1 with the complementary-slackness sign conventions.
double max_kkt_violation(const SvmModel& model, const SmoSolution& solution,
                         const RowMatrix& samples, std::span<const int> labels, double C);

}  // namespace regionlift
