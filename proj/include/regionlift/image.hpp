#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "regionlift/geometry.hpp"

namespace regionlift {

/// 8-bit single-channel raster, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  ImageExtent extent() const { return {width, height}; }
  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

/// Integer luma (77R + 150G + 29B) >> 8.
inline std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return static_cast<std::uint8_t>((77u * r + 150u * g + 29u * b) >> 8);
}

/// Loads binary PGM (P5), binary PPM (P6) or PNG; colour input is converted
/// with `luma`. Throws std::runtime_error on unreadable or malformed files.
GrayImage load_image(const std::filesystem::path& path);

void save_pgm(const GrayImage& image, const std::filesystem::path& path);

/// Sub-image covering `frame`, which must lie inside the image.
GrayImage crop(const GrayImage& image, const Rect& frame);

}  // namespace regionlift
