#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "regionlift/matrix.hpp"

namespace regionlift {

struct Codebook {
  RowMatrix centers;  // K x d
  std::string channel = "lbp";

  std::size_t size() const { return static_cast<std::size_t>(centers.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(centers.cols()); }
};

struct KMeansParams {
  int clusters = 256;
  std::uint64_t seed = 0;
  int max_iters = 50;
  /// Stop once the relative objective decrease drops below this.
  double tol = 1e-4;
};

struct KMeansResult {
  Codebook codebook;
  /// Sum of squared distances after each assignment step; non-increasing.
  std::vector<double> objective;
  std::vector<int> assignment;
};

/// Lloyd's algorithm with k-means++ seeding. A cluster that empties is
/// re-seeded at the point currently farthest from its centre.
/// Throws std::invalid_argument when there are fewer rows than clusters.
KMeansResult kmeans_train(const RowMatrix& data, const KMeansParams& params);

/// Index of the nearest centre; ties go to the lower index.
int nearest_center(const Codebook& codebook, const double* x);

}  // namespace regionlift
