#include "regionlift/image.hpp"

#include <png.h>

#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>

namespace regionlift {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  throw std::runtime_error(path.string() + ": " + what);
}

int read_header_int(std::istream& in, const std::filesystem::path& path) {
  int c = in.peek();
  while (c != EOF) {
    if (std::isspace(c)) {
      in.get();
    } else if (c == '#') {
      std::string comment;
      std::getline(in, comment);
    } else {
      break;
    }
    c = in.peek();
  }
  int value = 0;
  if (!(in >> value) || value <= 0) fail(path, "malformed netpbm header");
  return value;
}

GrayImage load_netpbm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  if (magic != "P5" && magic != "P6") fail(path, "unsupported netpbm variant");
  const int width = read_header_int(in, path);
  const int height = read_header_int(in, path);
  const int maxval = read_header_int(in, path);
  if (maxval > 255) fail(path, "16-bit netpbm is not supported");
  in.get();  // single whitespace before the raster

  const std::size_t channels = magic == "P6" ? 3 : 1;
  std::vector<std::uint8_t> raw(static_cast<std::size_t>(width) * height * channels);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) fail(path, "truncated raster");

  GrayImage img(width, height);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    std::uint32_t v = channels == 3 ? luma(raw[3 * i], raw[3 * i + 1], raw[3 * i + 2]) : raw[i];
    if (maxval != 255) v = (v * 255 + maxval / 2) / maxval;
    img.pixels[i] = static_cast<std::uint8_t>(v);
  }
  return img;
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

GrayImage load_png(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "rb"));
  if (!file) fail(path, "cannot open");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail(path, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail(path, "libpng initialisation failed");
  }
  std::vector<std::uint8_t> rgba;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "corrupt PNG");
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_filler(png, 0xFF, PNG_FILLER_AFTER);
  png_read_update_info(png, info);

  rgba.resize(static_cast<std::size_t>(width) * height * 4);
  std::vector<png_bytep> rows(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = rgba.data() + std::size_t{y} * width * 4;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  GrayImage img(static_cast<int>(width), static_cast<int>(height));
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    img.pixels[i] = luma(rgba[4 * i], rgba[4 * i + 1], rgba[4 * i + 2]);
  }
  return img;
}

}  // namespace

GrayImage load_image(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) fail(path, "cannot open");
  unsigned char sig[8] = {};
  probe.read(reinterpret_cast<char*>(sig), sizeof sig);
  probe.close();
  if (png_sig_cmp(sig, 0, sizeof sig) == 0) return load_png(path);
  if (sig[0] == 'P') return load_netpbm(path);
  fail(path, "unrecognised image format");
}

void save_pgm(const GrayImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot write");
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
}

GrayImage crop(const GrayImage& image, const Rect& frame) {
  if (!frame.valid() || !image.extent().contains(frame)) {
    throw std::out_of_range("crop frame outside image");
  }
  GrayImage out(frame.width(), frame.height());
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) out.at(x, y) = image.at(frame.x1 + x, frame.y1 + y);
  }
  return out;
}

}  // namespace regionlift
