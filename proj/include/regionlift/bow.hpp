#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "regionlift/geometry.hpp"
#include "regionlift/image.hpp"
#include "regionlift/kmeans.hpp"
#include "regionlift/lbp.hpp"
#include "regionlift/llc.hpp"
#include "regionlift/spm.hpp"
#include "regionlift/svm.hpp"

namespace regionlift {

/// Everything needed to turn a masked region into a pooled feature vector.
struct BowEncoding {
  Codebook codebook;
  SamplingConfig sampling;
  LlcParams llc;
  PyramidConfig pyramid;

  std::size_t feature_dim() const { return feature_dimension(1, codebook.size(), pyramid); }
};

struct LinearScorer {
  std::vector<double> weights;
  double bias = 0.0;

  /// Throws std::invalid_argument on a dimension mismatch.
  double score(std::span<const double> feature) const;
};

struct RegionFeature {
  std::vector<double> values;
  std::string image_id;
  int box_index = -1;
};

/// Per-image feature extraction with shared LBP codes and a code cache keyed
/// by absolute patch position. Patch grids are anchored at each region's
/// bounding box, so the cache never changes results, only their cost.
/// Not thread-safe; use one extractor per image per thread.
class FeatureExtractor {
 public:
  FeatureExtractor(const GrayImage& image, const BowEncoding& encoding);

  /// Pooled feature of a region given in image coordinates. An empty region
  /// pools to the zero vector.
  std::vector<double> region_feature(const Region& region);

  /// Pooled feature for a mask laid over `frame` (mask is frame-sized).
  std::vector<double> masked_feature(const Rect& frame, const Bitmask& mask);

  std::size_t cached_codes() const { return cache_.size(); }

 private:
  const SparseCode& code_at(int x0, int y0, int size);

  const GrayImage& image_;
  const BowEncoding& encoding_;
  std::vector<std::uint8_t> lbp_codes_;
  std::unordered_map<std::uint64_t, SparseCode> cache_;
};

/// Pooled feature of a crop whose mask has the crop's dimensions.
std::vector<double> region_feature(const GrayImage& crop, const Bitmask& mask,
                                   const BowEncoding& encoding);

/// w . feature + b for the masked crop.
double classify_region(const GrayImage& crop, const Bitmask& mask, const BowEncoding& encoding,
                       const LinearScorer& scorer);

/// Linear SVM on pooled features, collapsed to primal weights.
LinearScorer train_linear_classifier(const RowMatrix& features, std::span<const int> labels,
                                     const SmoParams& params);

}  // namespace regionlift
