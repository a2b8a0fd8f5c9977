#pragma once

#include <cstddef>
#include <vector>

#include "regionlift/llc.hpp"

namespace regionlift {

struct PyramidLevel {
  int rows = 1;
  int cols = 1;
  friend bool operator==(const PyramidLevel&, const PyramidLevel&) = default;
};

struct PyramidConfig {
  std::vector<PyramidLevel> levels{{1, 1}, {1, 2}, {2, 3}};

  std::size_t cells() const;
  friend bool operator==(const PyramidConfig&, const PyramidConfig&) = default;
};

/// Pooled feature length: channels x codebook size x pyramid cells.
std::size_t feature_dimension(std::size_t channels, std::size_t codebook_size,
                              const PyramidConfig& pyramid);

struct PositionedCode {
  SparseCode code;
  int x = 0;  // relative to the pooling frame
  int y = 0;
};

/// Spatial-pyramid max pooling over a width x height frame. Each level
/// partitions the frame into rows x cols cells; a code at (x, y) lands in cell
/// (y * rows / height, x * cols / width). Cells are concatenated level by
/// level, row-major, each holding `codebook_size` entries. Pooling starts from
/// zero, so negative code entries never surface and empty cells stay zero.
std::vector<double> spm_pool(const std::vector<PositionedCode>& codes, int width, int height,
                             std::size_t codebook_size, const PyramidConfig& pyramid);

}  // namespace regionlift
