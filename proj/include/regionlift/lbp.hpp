#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "regionlift/geometry.hpp"
#include "regionlift/image.hpp"

namespace regionlift {

/// 58 uniform 8-neighbour patterns plus one bin for everything else.
inline constexpr int kLbpBins = 59;

/// 8-neighbour, radius-1 code at an interior pixel. Bit p is set when
/// neighbour p is >= the centre; neighbours run clockwise from the top-left.
std::uint8_t lbp_code(const GrayImage& image, int x, int y);

/// Histogram bin of a code: uniform patterns (at most two circular 0/1
/// transitions) map to 0..57 in increasing code order, the rest to 58.
int uniform_bin(std::uint8_t code);

/// Codes for every pixel; the one-pixel border is left at 0 and never read.
std::vector<std::uint8_t> lbp_code_map(const GrayImage& image);

struct Descriptor {
  std::vector<double> values;
  int x = 0;  // patch centre in crop coordinates
  int y = 0;
  int patch_size = 0;
};

/// L1-normalised uniform LBP histogram over the interior of a patch.
/// Throws std::invalid_argument for patches smaller than 3x3.
Descriptor lbp_descriptor(const GrayImage& patch);

/// Same histogram, read from a precomputed code map for the square patch with
/// top-left (x0, y0). Equal to lbp_descriptor of the cropped patch.
std::vector<double> patch_histogram(const std::vector<std::uint8_t>& codes, int image_width,
                                    int x0, int y0, int patch_size);

struct SamplingConfig {
  std::vector<int> patch_sizes{12, 16};
  /// Grid step; 0 means half the patch size (50% overlap).
  int stride = 0;

  int stride_for(int patch_size) const { return stride > 0 ? stride : std::max(1, patch_size / 2); }
};

struct GridPatch {
  int x0 = 0;  // top-left, crop coordinates
  int y0 = 0;
  int size = 0;
  int cx() const { return x0 + size / 2; }
  int cy() const { return y0 + size / 2; }
};

/// Grid positions (anchored at the crop origin) whose patch fits in the crop
/// and whose centre lies inside the mask, for every configured patch size.
std::vector<GridPatch> grid_patches(int width, int height, const Bitmask& mask,
                                    const SamplingConfig& config);

/// Dense multi-scale LBP descriptors of a masked crop. The mask must match
/// the crop dimensions; an empty mask yields no descriptors.
std::vector<Descriptor> dense_sample(const GrayImage& crop, const Bitmask& mask,
                                     const SamplingConfig& config);

}  // namespace regionlift
