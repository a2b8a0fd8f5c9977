#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace regionlift {

/// Axis-aligned rectangle in half-open integer pixel coordinates:
/// it covers pixels with x1 <= x < x2 and y1 <= y < y2.
struct Rect {
  int x1 = 0;
  int y1 = 0;
  int x2 = 0;
  int y2 = 0;

  int width() const { return x2 - x1; }
  int height() const { return y2 - y1; }
  std::int64_t area() const {
    return valid() ? std::int64_t{width()} * height() : 0;
  }
  bool valid() const { return x1 < x2 && y1 < y2; }
  bool contains(int x, int y) const {
    return x >= x1 && x < x2 && y >= y1 && y < y2;
  }

  // Lexicographic on (y1, x1, y2, x2), the canonical region order.
  friend bool operator==(const Rect&, const Rect&) = default;
  friend std::strong_ordering operator<=>(const Rect& a, const Rect& b) {
    if (auto c = a.y1 <=> b.y1; c != 0) return c;
    if (auto c = a.x1 <=> b.x1; c != 0) return c;
    if (auto c = a.y2 <=> b.y2; c != 0) return c;
    return a.x2 <=> b.x2;
  }
};

/// A detection or ground-truth box: a rectangle plus a confidence and class.
struct BoundingBox {
  Rect rect;
  double score = 0.0;
  int category_id = 0;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct ImageExtent {
  int width = 1;
  int height = 1;

  Rect rect() const { return {0, 0, width, height}; }
  bool contains(const Rect& r) const {
    return r.x1 >= 0 && r.y1 >= 0 && r.x2 <= width && r.y2 <= height;
  }
  friend bool operator==(const ImageExtent&, const ImageExtent&) = default;
};

/// Throws std::invalid_argument if the rectangle is degenerate.
void require_valid(const Rect& r);
/// Throws std::invalid_argument for a non-positive extent.
void require_valid(const ImageExtent& e);

/// A rectilinear pixel set stored as disjoint rectangles in canonical form.
///
/// Canonical form is the slab decomposition: the plane is cut into
/// horizontal slabs at every rectangle edge, each slab holds a sorted list of
/// maximal x-intervals, and vertically adjacent slabs with identical interval
/// lists are merged. The resulting rectangles are sorted by (y1, x1, y2, x2).
/// Two regions compare equal exactly when they cover the same pixels.
class Region {
 public:
  Region() = default;
  explicit Region(const Rect& r);

  /// Canonicalizes an arbitrary (possibly overlapping) rectangle list.
  /// Degenerate rectangles are ignored.
  static Region from_rects(std::span<const Rect> rects);
  static Region full(const ImageExtent& extent);

  const std::vector<Rect>& rects() const { return rects_; }
  bool empty() const { return rects_.empty(); }
  std::int64_t area() const;
  std::optional<Rect> bounds() const;
  bool contains(int x, int y) const;
  Region translated(int dx, int dy) const;

  friend bool operator==(const Region&, const Region&) = default;

 private:
  friend struct RegionBuilder;
  std::vector<Rect> rects_;
};

std::optional<Rect> intersect(const Rect& a, const Rect& b);

/// pixels(r) \ pixels(b). Every input rectangle is split into at most four
/// pieces before the result is canonicalized.
Region subtract(const Region& r, const Rect& b);

Region union_region(const Region& a, const Region& b);
Region intersect(const Region& a, const Region& b);
Region intersect(const Region& a, const Rect& b);
Region difference(const Region& a, const Region& b);
/// extent \ r
Region complement(const Region& r, const ImageExtent& extent);

inline std::int64_t area(const Region& r) { return r.area(); }

/// |a ∩ b| / |a ∪ b| with both areas computed exactly before the division.
double iou(const Rect& a, const Rect& b);

/// Moves every side outward by margin_frac times the box dimension along that
/// axis (rounded half away from zero), then clips to the extent.
Rect expand(const Rect& b, double margin_frac, const ImageExtent& extent);

/// Dense boolean raster of a region, row-major.
struct Bitmask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  Bitmask() = default;
  Bitmask(int w, int h, bool value = false)
      : width(w), height(h), bits(static_cast<std::size_t>(w) * h, value ? 1 : 0) {}

  bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
  std::int64_t count() const;
  friend bool operator==(const Bitmask&, const Bitmask&) = default;
};

/// Throws std::out_of_range if the region pokes outside the extent.
Bitmask rasterize(const Region& r, const ImageExtent& extent);

}  // namespace regionlift
