#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "regionlift/geometry.hpp"

namespace regionlift {

/// Which boxes are carved out of D_k when forming its supporting region.
///
/// `higher` removes the parts of D_k covered by better-scored boxes, so a
/// region is only shaped by detections ranked above it. `lower` removes the
/// parts covered by worse-scored boxes instead.
enum class Orientation { higher, lower };

struct SupportOptions {
  Orientation orientation = Orientation::higher;
  bool include_background = true;
  double margin_frac = 0.5;
};

/// Detection boxes of one image in descending score order.
struct RankedDetections {
  std::vector<BoundingBox> boxes;
  ImageExtent image;
  /// source_index[k] is the position of boxes[k] in the unsorted input.
  std::vector<std::size_t> source_index;

  std::size_t size() const { return boxes.size(); }
};

/// Stable sort by descending score; equal scores keep input order.
/// Throws std::invalid_argument for degenerate boxes or boxes outside the image.
RankedDetections rank_detections(std::vector<BoundingBox> boxes, const ImageExtent& image);

/// Union of every detection box.
Region detection_union(const RankedDetections& d);

/// The image minus the union of all detection boxes.
Region background_region(const RankedDetections& d);

/// Background plus the part of box k not covered by the boxes selected by
/// the orientation. Throws std::out_of_range for a bad index.
Region supporting_region(const RankedDetections& d, std::size_t k,
                         const SupportOptions& options = {});

/// Margin ring around box i: expand(D_i) minus every detection box.
Region local_background(const RankedDetections& d, std::size_t i, double margin_frac);

struct SupportEntry {
  std::size_t index = 0;
  Region support;
  Region local_background;
};

struct SupportSet {
  Region background;
  std::vector<SupportEntry> per_box;
};

SupportSet build_support_set(const RankedDetections& d, const SupportOptions& options = {});

/// Region classifier f_c as seen by the support-set builder.
using RegionScorer = std::function<double(const Region&)>;

/// Scores every supporting region of a support set, in rank order.
std::vector<double> score_supports(const SupportSet& set, const RegionScorer& scorer);

}  // namespace regionlift
