#include "regionlift/spm.hpp"

#include <algorithm>
#include <stdexcept>

namespace regionlift {

std::size_t PyramidConfig::cells() const {
  std::size_t total = 0;
  for (const auto& level : levels) total += static_cast<std::size_t>(level.rows) * level.cols;
  return total;
}

std::size_t feature_dimension(std::size_t channels, std::size_t codebook_size,
                              const PyramidConfig& pyramid) {
  return channels * codebook_size * pyramid.cells();
}

std::vector<double> spm_pool(const std::vector<PositionedCode>& codes, int width, int height,
                             std::size_t codebook_size, const PyramidConfig& pyramid) {
  if (width < 1 || height < 1) throw std::invalid_argument("pooling frame must be non-empty");
  for (const auto& level : pyramid.levels) {
    if (level.rows < 1 || level.cols < 1) throw std::invalid_argument("bad pyramid level");
  }
  std::vector<double> pooled(feature_dimension(1, codebook_size, pyramid), 0.0);
  for (const PositionedCode& pc : codes) {
    if (pc.x < 0 || pc.x >= width || pc.y < 0 || pc.y >= height) {
      throw std::out_of_range("code position outside pooling frame");
    }
    std::size_t offset = 0;
    for (const auto& level : pyramid.levels) {
      const auto row = static_cast<std::size_t>(static_cast<long>(pc.y) * level.rows / height);
      const auto col = static_cast<std::size_t>(static_cast<long>(pc.x) * level.cols / width);
      double* cell = pooled.data() + offset + (row * level.cols + col) * codebook_size;
      for (std::size_t i = 0; i < pc.code.index.size(); ++i) {
        double& slot = cell[pc.code.index[i]];
        slot = std::max(slot, pc.code.value[i]);
      }
      offset += static_cast<std::size_t>(level.rows) * level.cols * codebook_size;
    }
  }
  return pooled;
}

}  // namespace regionlift
