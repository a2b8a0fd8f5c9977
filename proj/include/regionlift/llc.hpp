#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "regionlift/kmeans.hpp"

namespace regionlift {

struct LlcParams {
  int neighbors = 5;
  double lambda = 1e-4;
};

/// Code over a codebook with at most `neighbors` nonzero entries.
struct SparseCode {
  std::vector<std::uint32_t> index;
  std::vector<double> value;

  std::vector<double> dense(std::size_t codebook_size) const;
};

/// Indices of the `count` nearest centres, closest first (ties by index).
std::vector<std::uint32_t> nearest_centers(const Codebook& codebook, std::span<const double> x,
                                           int count);

/// Locality-constrained linear code of x.
///
/// Restricted to the nearest centres b_1..b_m, solves
///   min_w ||x - sum_i w_i b_i||^2 + lambda ||w||^2   subject to   sum_i w_i = 1
/// through its KKT system. With lambda = 0 and affinely dependent neighbours
/// the system is singular and std::domain_error is thrown.
SparseCode llc_encode(std::span<const double> x, const Codebook& codebook,
                      const LlcParams& params);

}  // namespace regionlift
