#include "regionlift/supporting_regions.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace regionlift {

RankedDetections rank_detections(std::vector<BoundingBox> boxes, const ImageExtent& image) {
  require_valid(image);
  for (const BoundingBox& b : boxes) {
    require_valid(b.rect);
    if (!image.contains(b.rect)) throw std::invalid_argument("detection box outside image");
  }
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return boxes[a].score > boxes[b].score;
  });

  RankedDetections out;
  out.image = image;
  out.source_index = order;
  out.boxes.reserve(boxes.size());
  for (std::size_t i : order) out.boxes.push_back(boxes[i]);
  return out;
}

Region detection_union(const RankedDetections& d) {
  std::vector<Rect> rects;
  rects.reserve(d.boxes.size());
  for (const BoundingBox& b : d.boxes) rects.push_back(b.rect);
  return Region::from_rects(rects);
}

Region background_region(const RankedDetections& d) {
  return complement(detection_union(d), d.image);
}

namespace {

void check_index(const RankedDetections& d, std::size_t k) {
  if (k >= d.boxes.size()) {
    throw std::out_of_range("box index " + std::to_string(k) + " out of range for " +
                            std::to_string(d.boxes.size()) + " detections");
  }
}

Region excluded_boxes(const RankedDetections& d, std::size_t k, Orientation orientation) {
  std::vector<Rect> rects;
  if (orientation == Orientation::higher) {
    for (std::size_t i = 0; i < k; ++i) rects.push_back(d.boxes[i].rect);
  } else {
    for (std::size_t i = k + 1; i < d.boxes.size(); ++i) rects.push_back(d.boxes[i].rect);
  }
  return Region::from_rects(rects);
}

Region assemble(const Region& background, const Rect& box, const Region& excluded,
                bool include_background) {
  Region own = difference(Region(box), excluded);
  return include_background ? union_region(background, own) : own;
}

}  // namespace

Region supporting_region(const RankedDetections& d, std::size_t k,
                         const SupportOptions& options) {
  check_index(d, k);
  const Region background =
      options.include_background ? background_region(d) : Region{};
  return assemble(background, d.boxes[k].rect, excluded_boxes(d, k, options.orientation),
                  options.include_background);
}

Region local_background(const RankedDetections& d, std::size_t i, double margin_frac) {
  check_index(d, i);
  const Rect grown = expand(d.boxes[i].rect, margin_frac, d.image);
  return difference(Region(grown), detection_union(d));
}

SupportSet build_support_set(const RankedDetections& d, const SupportOptions& options) {
  SupportSet set;
  const Region all_boxes = detection_union(d);
  set.background = complement(all_boxes, d.image);

  const std::size_t n = d.boxes.size();
  std::vector<Region> excluded(n);
  // Accumulate the exclusion union incrementally from the carving side.
  Region running;
  if (options.orientation == Orientation::higher) {
    for (std::size_t k = 0; k < n; ++k) {
      excluded[k] = running;
      running = union_region(running, Region(d.boxes[k].rect));
    }
  } else {
    for (std::size_t k = n; k-- > 0;) {
      excluded[k] = running;
      running = union_region(running, Region(d.boxes[k].rect));
    }
  }

  set.per_box.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    SupportEntry entry;
    entry.index = k;
    entry.support =
        assemble(set.background, d.boxes[k].rect, excluded[k], options.include_background);
    entry.local_background = difference(
        Region(expand(d.boxes[k].rect, options.margin_frac, d.image)), all_boxes);
    set.per_box.push_back(std::move(entry));
  }
  return set;
}

std::vector<double> score_supports(const SupportSet& set, const RegionScorer& scorer) {
  std::vector<double> scores;
  scores.reserve(set.per_box.size());
  for (const SupportEntry& e : set.per_box) scores.push_back(scorer(e.support));
  return scores;
}

}  // namespace regionlift
