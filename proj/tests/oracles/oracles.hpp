// Reference implementations used only by tests. They deliberately take the
// slow, obvious route and share no code with the library beyond plain types.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "regionlift/evaluation.hpp"
#include "regionlift/geometry.hpp"
#include "regionlift/random.hpp"

namespace oracle {

using regionlift::BoundingBox;
using regionlift::Rect;

// Boolean pixel grid.
struct Grid {
  int w = 0;
  int h = 0;
  std::vector<char> px;

  Grid(int width, int height, bool v = false)
      : w(width), h(height), px(static_cast<std::size_t>(width) * height, v ? 1 : 0) {}
  char& at(int x, int y) { return px[static_cast<std::size_t>(y) * w + x]; }
  char at(int x, int y) const { return px[static_cast<std::size_t>(y) * w + x]; }
  long count() const { return std::count(px.begin(), px.end(), 1); }
  bool operator==(const Grid&) const = default;
};

inline void paint(Grid& g, const Rect& r, bool v = true) {
  for (int y = std::max(0, r.y1); y < std::min(g.h, r.y2); ++y)
    for (int x = std::max(0, r.x1); x < std::min(g.w, r.x2); ++x) g.at(x, y) = v ? 1 : 0;
}

// Paints a region rectangle by rectangle. Throws if two rectangles share a
// pixel, which would break the disjointness invariant.
inline Grid paint_region(const regionlift::Region& r, int w, int h) {
  Grid g(w, h);
  for (const Rect& rect : r.rects()) {
    for (int y = rect.y1; y < rect.y2; ++y)
      for (int x = rect.x1; x < rect.x2; ++x) {
        if (x < 0 || y < 0 || x >= w || y >= h) throw std::out_of_range("rect outside grid");
        if (g.at(x, y)) throw std::logic_error("overlapping rectangles in region");
        g.at(x, y) = 1;
      }
  }
  return g;
}

inline int round_half_away(double v) {
  return static_cast<int>(v < 0 ? -std::floor(-v + 0.5) : std::floor(v + 0.5));
}

inline Rect expand(const Rect& b, double m, int w, int h) {
  const int dx = round_half_away(m * (b.x2 - b.x1));
  const int dy = round_half_away(m * (b.y2 - b.y1));
  return {std::max(0, b.x1 - dx), std::max(0, b.y1 - dy), std::min(w, b.x2 + dx),
          std::min(h, b.y2 + dy)};
}

inline Grid background(const std::vector<Rect>& boxes, int w, int h) {
  Grid g(w, h, true);
  for (const Rect& b : boxes) paint(g, b, false);
  return g;
}

// higher = carve boxes ranked before k, otherwise boxes ranked after k.
inline Grid support(const std::vector<Rect>& boxes, std::size_t k, bool higher, bool with_bg,
                    int w, int h) {
  Grid g = with_bg ? background(boxes, w, h) : Grid(w, h);
  Grid own(w, h);
  paint(own, boxes[k]);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if ((higher && i < k) || (!higher && i > k)) paint(own, boxes[i], false);
  }
  for (std::size_t p = 0; p < g.px.size(); ++p) g.px[p] = g.px[p] || own.px[p];
  return g;
}

inline Grid local_background(const std::vector<Rect>& boxes, std::size_t i, double m, int w,
                             int h) {
  Grid g(w, h);
  paint(g, expand(boxes[i], m, w, h));
  for (const Rect& b : boxes) paint(g, b, false);
  return g;
}

inline double iou(const Rect& a, const Rect& b) {
  long inter = 0;
  for (int y = std::min(a.y1, b.y1); y < std::max(a.y2, b.y2); ++y)
    for (int x = std::min(a.x1, b.x1); x < std::max(a.x2, b.x2); ++x)
      inter += a.contains(x, y) && b.contains(x, y);
  const long uni = static_cast<long>(a.width()) * a.height() +
                   static_cast<long>(b.width()) * b.height() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

inline Rect random_rect(regionlift::Rng& rng, int w, int h) {
  const int x1 = rng.range(0, w - 1);
  const int y1 = rng.range(0, h - 1);
  return {x1, y1, rng.range(x1 + 1, w), rng.range(y1 + 1, h)};
}

// Slow evaluator: per category, stable sort by score, brute-force search over
// unmatched ground truth, then AP as the mean over eleven recall levels of
// the best precision at any recall at or above the level.
struct SlowEval {
  std::map<int, double> ap;
  double map = 0.0;
};

inline SlowEval slow_evaluate(const std::vector<regionlift::Detection>& dets,
                              const regionlift::GroundTruthSet& gt,
                              const std::vector<int>& categories, double thr) {
  SlowEval out;
  int counted = 0;
  for (int c : categories) {
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t i = 0; i < dets.size(); ++i)
      if (dets[i].box.category_id == c) order.push_back({dets[i].box.score, i});
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::map<std::string, std::vector<bool>> used;
    long total = 0;
    for (const auto& [img, boxes] : gt) {
      used[img].assign(boxes.size(), false);
      for (const auto& b : boxes) total += b.category_id == c;
    }
    if (total == 0) continue;
    std::vector<double> rec, prec;
    long tp = 0, n = 0;
    for (const auto& [score, i] : order) {
      ++n;
      const auto it = gt.find(dets[i].image_id);
      double best = -1.0;
      long best_j = -1;
      if (it != gt.end()) {
        for (std::size_t j = 0; j < it->second.size(); ++j) {
          if (it->second[j].category_id != c || used[dets[i].image_id][j]) continue;
          const double o = oracle::iou(dets[i].box.rect, it->second[j].rect);
          if (o > best) {
            best = o;
            best_j = static_cast<long>(j);
          }
        }
      }
      if (best_j >= 0 && best >= thr) {
        used[dets[i].image_id][static_cast<std::size_t>(best_j)] = true;
        ++tp;
      }
      rec.push_back(static_cast<double>(tp) / static_cast<double>(total));
      prec.push_back(static_cast<double>(tp) / static_cast<double>(n));
    }
    double sum = 0.0;
    for (int level = 0; level <= 10; ++level) {
      double p = 0.0;
      for (std::size_t q = 0; q < rec.size(); ++q)
        if (rec[q] >= level / 10.0) p = std::max(p, prec[q]);
      sum += p;
    }
    out.ap[c] = sum / 11.0;
    out.map += out.ap[c];
    ++counted;
  }
  if (counted > 0) out.map /= counted;
  return out;
}

// Dense Gaussian elimination with partial pivoting.
inline std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    if (std::abs(a[c][c]) < 1e-300) throw std::domain_error("singular");
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t c = n; c-- > 0;) {
    double s = b[c];
    for (std::size_t k = c + 1; k < n; ++k) s -= a[c][k] * x[k];
    x[c] = s / a[c][c];
  }
  return x;
}

// min ||x - sum w_i b_i||^2 + lambda ||w||^2 s.t. sum w = 1, solved by
// eliminating the last weight (w_m = 1 - sum of the others) and solving the
// unconstrained normal equations in the remaining m - 1 weights.
inline std::vector<double> constrained_ls(const std::vector<double>& x,
                                          const std::vector<std::vector<double>>& basis,
                                          double lambda) {
  const std::size_t m = basis.size();
  const std::size_t d = x.size();
  if (m == 1) return {1.0};
  const auto& last = basis.back();
  std::vector<std::vector<double>> A(d, std::vector<double>(m - 1));
  std::vector<double> r(d);
  for (std::size_t t = 0; t < d; ++t) {
    for (std::size_t i = 0; i + 1 < m; ++i) A[t][i] = basis[i][t] - last[t];
    r[t] = x[t] - last[t];
  }
  std::vector<std::vector<double>> N(m - 1, std::vector<double>(m - 1, 0.0));
  std::vector<double> rhs(m - 1, lambda);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    for (std::size_t j = 0; j + 1 < m; ++j) {
      double s = lambda * (1.0 + (i == j ? 1.0 : 0.0));
      for (std::size_t t = 0; t < d; ++t) s += A[t][i] * A[t][j];
      N[i][j] = s;
    }
    for (std::size_t t = 0; t < d; ++t) rhs[i] += A[t][i] * r[t];
  }
  std::vector<double> w = solve(N, rhs);
  double rest = 1.0;
  for (double v : w) rest -= v;
  w.push_back(rest);
  return w;
}

}  // namespace oracle
