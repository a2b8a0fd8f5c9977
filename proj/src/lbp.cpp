#include "regionlift/lbp.hpp"

#include <array>
#include <bit>
#include <stdexcept>

namespace regionlift {

namespace {

constexpr std::array<int, 8> kDx{-1, 0, 1, 1, 1, 0, -1, -1};
constexpr std::array<int, 8> kDy{-1, -1, -1, 0, 1, 1, 1, 0};

constexpr std::array<std::uint8_t, 256> make_bin_table() {
  std::array<std::uint8_t, 256> table{};
  int next = 0;
  for (int code = 0; code < 256; ++code) {
    const auto c = static_cast<std::uint8_t>(code);
    const auto rotated = static_cast<std::uint8_t>((c >> 1) | (c << 7));
    const int transitions = std::popcount(static_cast<unsigned>(c ^ rotated));
    table[code] = static_cast<std::uint8_t>(transitions <= 2 ? next++ : kLbpBins - 1);
  }
  return table;
}

constexpr auto kBinTable = make_bin_table();

}  // namespace

std::uint8_t lbp_code(const GrayImage& image, int x, int y) {
  const std::uint8_t centre = image.at(x, y);
  std::uint8_t code = 0;
  for (int p = 0; p < 8; ++p) {
    if (image.at(x + kDx[p], y + kDy[p]) >= centre) code |= static_cast<std::uint8_t>(1u << p);
  }
  return code;
}

int uniform_bin(std::uint8_t code) { return kBinTable[code]; }

std::vector<std::uint8_t> lbp_code_map(const GrayImage& image) {
  std::vector<std::uint8_t> codes(image.pixels.size(), 0);
  for (int y = 1; y + 1 < image.height; ++y) {
    for (int x = 1; x + 1 < image.width; ++x) {
      codes[static_cast<std::size_t>(y) * image.width + x] = lbp_code(image, x, y);
    }
  }
  return codes;
}

std::vector<double> patch_histogram(const std::vector<std::uint8_t>& codes, int image_width,
                                    int x0, int y0, int patch_size) {
  std::array<int, kLbpBins> counts{};
  int total = 0;
  for (int y = y0 + 1; y < y0 + patch_size - 1; ++y) {
    const std::uint8_t* row = codes.data() + static_cast<std::size_t>(y) * image_width;
    for (int x = x0 + 1; x < x0 + patch_size - 1; ++x) {
      ++counts[kBinTable[row[x]]];
      ++total;
    }
  }
  std::vector<double> hist(kLbpBins, 0.0);
  if (total == 0) return hist;
  for (int b = 0; b < kLbpBins; ++b) hist[b] = static_cast<double>(counts[b]) / total;
  return hist;
}

Descriptor lbp_descriptor(const GrayImage& patch) {
  if (patch.width < 3 || patch.height < 3) {
    throw std::invalid_argument("LBP patch must be at least 3x3");
  }
  std::array<int, kLbpBins> counts{};
  int total = 0;
  for (int y = 1; y + 1 < patch.height; ++y) {
    for (int x = 1; x + 1 < patch.width; ++x) {
      ++counts[kBinTable[lbp_code(patch, x, y)]];
      ++total;
    }
  }
  Descriptor d;
  d.values.assign(kLbpBins, 0.0);
  for (int b = 0; b < kLbpBins; ++b) d.values[b] = static_cast<double>(counts[b]) / total;
  d.x = patch.width / 2;
  d.y = patch.height / 2;
  d.patch_size = std::max(patch.width, patch.height);
  return d;
}

std::vector<GridPatch> grid_patches(int width, int height, const Bitmask& mask,
                                    const SamplingConfig& config) {
  if (mask.width != width || mask.height != height) {
    throw std::invalid_argument("mask dimensions do not match the crop");
  }
  std::vector<GridPatch> out;
  for (int size : config.patch_sizes) {
    if (size < 3) throw std::invalid_argument("patch size must be at least 3");
    const int step = config.stride_for(size);
    for (int y0 = 0; y0 + size <= height; y0 += step) {
      for (int x0 = 0; x0 + size <= width; x0 += step) {
        GridPatch p{x0, y0, size};
        if (mask.at(p.cx(), p.cy())) out.push_back(p);
      }
    }
  }
  return out;
}

std::vector<Descriptor> dense_sample(const GrayImage& crop, const Bitmask& mask,
                                     const SamplingConfig& config) {
  const auto patches = grid_patches(crop.width, crop.height, mask, config);
  std::vector<Descriptor> out;
  if (patches.empty()) return out;
  const auto codes = lbp_code_map(crop);
  out.reserve(patches.size());
  for (const GridPatch& p : patches) {
    out.push_back({patch_histogram(codes, crop.width, p.x0, p.y0, p.size), p.cx(), p.cy(), p.size});
  }
  return out;
}

}  // namespace regionlift
