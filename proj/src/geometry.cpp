#include "regionlift/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace regionlift {

namespace {

struct Interval {
  int lo;
  int hi;
  friend bool operator==(const Interval&, const Interval&) = default;
};

enum class SetOp { unite, intersect, subtract };

// Merged, sorted x-intervals of every rectangle spanning the slab [ylo, yhi).
std::vector<Interval> slab_intervals(std::span<const Rect> rects, int ylo, int yhi) {
  std::vector<Interval> spans;
  for (const Rect& r : rects) {
    if (r.y1 <= ylo && r.y2 >= yhi) spans.push_back({r.x1, r.x2});
  }
  std::sort(spans.begin(), spans.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> merged;
  for (const Interval& s : spans) {
    if (!merged.empty() && s.lo <= merged.back().hi) {
      merged.back().hi = std::max(merged.back().hi, s.hi);
    } else {
      merged.push_back(s);
    }
  }
  return merged;
}

bool inside(const std::vector<Interval>& list, std::size_t& cursor, int x) {
  while (cursor < list.size() && list[cursor].hi <= x) ++cursor;
  return cursor < list.size() && list[cursor].lo <= x;
}

std::vector<Interval> combine_intervals(const std::vector<Interval>& a,
                                        const std::vector<Interval>& b, SetOp op) {
  std::vector<int> xs;
  xs.reserve(2 * (a.size() + b.size()));
  for (const auto& s : a) { xs.push_back(s.lo); xs.push_back(s.hi); }
  for (const auto& s : b) { xs.push_back(s.lo); xs.push_back(s.hi); }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  std::vector<Interval> out;
  std::size_t ca = 0;
  std::size_t cb = 0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const bool in_a = inside(a, ca, xs[i]);
    const bool in_b = inside(b, cb, xs[i]);
    bool keep = false;
    switch (op) {
      case SetOp::unite: keep = in_a || in_b; break;
      case SetOp::intersect: keep = in_a && in_b; break;
      case SetOp::subtract: keep = in_a && !in_b; break;
    }
    if (!keep) continue;
    if (!out.empty() && out.back().hi == xs[i]) {
      out.back().hi = xs[i + 1];
    } else {
      out.push_back({xs[i], xs[i + 1]});
    }
  }
  return out;
}

// Slab sweep shared by every boolean operation. Output is canonical.
std::vector<Rect> sweep(std::span<const Rect> a, std::span<const Rect> b, SetOp op) {
  std::vector<int> ys;
  ys.reserve(2 * (a.size() + b.size()));
  for (const Rect& r : a) { ys.push_back(r.y1); ys.push_back(r.y2); }
  for (const Rect& r : b) { ys.push_back(r.y1); ys.push_back(r.y2); }
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  std::vector<Rect> out;
  std::vector<Interval> run;
  int run_start = 0;
  int run_end = 0;
  auto flush = [&] {
    for (const Interval& s : run) out.push_back({s.lo, run_start, s.hi, run_end});
    run.clear();
  };
  for (std::size_t i = 0; i + 1 < ys.size(); ++i) {
    auto slab = combine_intervals(slab_intervals(a, ys[i], ys[i + 1]),
                                  slab_intervals(b, ys[i], ys[i + 1]), op);
    if (!run.empty() && slab == run && run_end == ys[i]) {
      run_end = ys[i + 1];
      continue;
    }
    flush();
    run = std::move(slab);
    run_start = ys[i];
    run_end = ys[i + 1];
  }
  flush();
  // Runs are emitted in y1 order with x-sorted intervals, so this is already
  // canonical; the sort only guards the ordering contract.
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Rect> drop_degenerate(std::span<const Rect> rects) {
  std::vector<Rect> kept;
  kept.reserve(rects.size());
  for (const Rect& r : rects) {
    if (r.valid()) kept.push_back(r);
  }
  return kept;
}

}  // namespace

struct RegionBuilder {
  static Region adopt(std::vector<Rect> canonical) {
    Region out;
    out.rects_ = std::move(canonical);
    return out;
  }
};

namespace {

Region combine(const Region& a, const Region& b, SetOp op) {
  return RegionBuilder::adopt(sweep(a.rects(), b.rects(), op));
}

}  // namespace

void require_valid(const Rect& r) {
  if (!r.valid()) {
    throw std::invalid_argument("degenerate rectangle (" + std::to_string(r.x1) + "," +
                                std::to_string(r.y1) + "," + std::to_string(r.x2) + "," +
                                std::to_string(r.y2) + ")");
  }
}

void require_valid(const ImageExtent& e) {
  if (e.width < 1 || e.height < 1) {
    throw std::invalid_argument("image extent must be at least 1x1");
  }
}

Region::Region(const Rect& r) {
  if (r.valid()) rects_.push_back(r);
}

Region Region::from_rects(std::span<const Rect> rects) {
  const auto kept = drop_degenerate(rects);
  return RegionBuilder::adopt(sweep(kept, {}, SetOp::unite));
}

Region Region::full(const ImageExtent& extent) {
  require_valid(extent);
  return Region(extent.rect());
}

std::int64_t Region::area() const {
  std::int64_t total = 0;
  for (const Rect& r : rects_) total += r.area();
  return total;
}

std::optional<Rect> Region::bounds() const {
  if (rects_.empty()) return std::nullopt;
  Rect b = rects_.front();
  for (const Rect& r : rects_) {
    b.x1 = std::min(b.x1, r.x1);
    b.y1 = std::min(b.y1, r.y1);
    b.x2 = std::max(b.x2, r.x2);
    b.y2 = std::max(b.y2, r.y2);
  }
  return b;
}

bool Region::contains(int x, int y) const {
  return std::any_of(rects_.begin(), rects_.end(),
                     [&](const Rect& r) { return r.contains(x, y); });
}

Region Region::translated(int dx, int dy) const {
  Region out;
  out.rects_.reserve(rects_.size());
  for (const Rect& r : rects_) out.rects_.push_back({r.x1 + dx, r.y1 + dy, r.x2 + dx, r.y2 + dy});
  return out;
}

std::optional<Rect> intersect(const Rect& a, const Rect& b) {
  Rect r{std::max(a.x1, b.x1), std::max(a.y1, b.y1), std::min(a.x2, b.x2),
         std::min(a.y2, b.y2)};
  if (!r.valid()) return std::nullopt;
  return r;
}

Region subtract(const Region& r, const Rect& b) {
  std::vector<Rect> pieces;
  pieces.reserve(r.rects().size() + 4);
  for (const Rect& rect : r.rects()) {
    const auto cut = intersect(rect, b);
    if (!cut) {
      pieces.push_back(rect);
      continue;
    }
    const Rect top{rect.x1, rect.y1, rect.x2, cut->y1};
    const Rect bottom{rect.x1, cut->y2, rect.x2, rect.y2};
    const Rect left{rect.x1, cut->y1, cut->x1, cut->y2};
    const Rect right{cut->x2, cut->y1, rect.x2, cut->y2};
    for (const Rect& p : {top, bottom, left, right}) {
      if (p.valid()) pieces.push_back(p);
    }
  }
  return Region::from_rects(pieces);
}

Region union_region(const Region& a, const Region& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  return combine(a, b, SetOp::unite);
}

Region intersect(const Region& a, const Region& b) {
  if (a.empty() || b.empty()) return {};
  return combine(a, b, SetOp::intersect);
}

Region intersect(const Region& a, const Rect& b) { return intersect(a, Region(b)); }

Region difference(const Region& a, const Region& b) {
  if (a.empty() || b.empty()) return a;
  return combine(a, b, SetOp::subtract);
}

Region complement(const Region& r, const ImageExtent& extent) {
  return difference(Region::full(extent), r);
}

double iou(const Rect& a, const Rect& b) {
  const std::int64_t inter = intersect(a, b).value_or(Rect{}).area();
  const std::int64_t uni = a.area() + b.area() - inter;
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

Rect expand(const Rect& b, double margin_frac, const ImageExtent& extent) {
  if (!std::isfinite(margin_frac)) throw std::invalid_argument("margin_frac must be finite");
  const long dx = std::lround(margin_frac * b.width());
  const long dy = std::lround(margin_frac * b.height());
  Rect out{static_cast<int>(b.x1 - dx), static_cast<int>(b.y1 - dy),
           static_cast<int>(b.x2 + dx), static_cast<int>(b.y2 + dy)};
  out.x1 = std::clamp(out.x1, 0, extent.width);
  out.y1 = std::clamp(out.y1, 0, extent.height);
  out.x2 = std::clamp(out.x2, 0, extent.width);
  out.y2 = std::clamp(out.y2, 0, extent.height);
  return out;
}

std::int64_t Bitmask::count() const {
  return std::count(bits.begin(), bits.end(), std::uint8_t{1});
}

Bitmask rasterize(const Region& r, const ImageExtent& extent) {
  require_valid(extent);
  Bitmask mask(extent.width, extent.height);
  for (const Rect& rect : r.rects()) {
    if (!extent.contains(rect)) throw std::out_of_range("region exceeds raster extent");
    for (int y = rect.y1; y < rect.y2; ++y) {
      for (int x = rect.x1; x < rect.x2; ++x) mask.set(x, y, true);
    }
  }
  return mask;
}

}  // namespace regionlift
