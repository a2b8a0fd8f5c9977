#include "regionlift/bow.hpp"

#include <stdexcept>
#include <string>

namespace regionlift {

double LinearScorer::score(std::span<const double> feature) const {
  if (feature.size() != weights.size()) {
    throw std::invalid_argument("feature has dimension " + std::to_string(feature.size()) +
                                ", classifier expects " + std::to_string(weights.size()));
  }
  double s = bias;
  for (std::size_t i = 0; i < feature.size(); ++i) s += weights[i] * feature[i];
  return s;
}

FeatureExtractor::FeatureExtractor(const GrayImage& image, const BowEncoding& encoding)
    : image_(image), encoding_(encoding), lbp_codes_(lbp_code_map(image)) {}

const SparseCode& FeatureExtractor::code_at(int x0, int y0, int size) {
  const std::uint64_t key = (static_cast<std::uint64_t>(x0) << 40) |
                            (static_cast<std::uint64_t>(y0) << 16) |
                            static_cast<std::uint64_t>(size);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  const auto hist = patch_histogram(lbp_codes_, image_.width, x0, y0, size);
  return cache_.emplace(key, llc_encode(hist, encoding_.codebook, encoding_.llc)).first->second;
}

std::vector<double> FeatureExtractor::masked_feature(const Rect& frame, const Bitmask& mask) {
  if (!image_.extent().contains(frame)) throw std::out_of_range("feature frame outside image");
  const auto patches = grid_patches(frame.width(), frame.height(), mask, encoding_.sampling);
  std::vector<PositionedCode> codes;
  codes.reserve(patches.size());
  for (const GridPatch& p : patches) {
    codes.push_back({code_at(frame.x1 + p.x0, frame.y1 + p.y0, p.size), p.cx(), p.cy()});
  }
  return spm_pool(codes, frame.width(), frame.height(), encoding_.codebook.size(),
                  encoding_.pyramid);
}

std::vector<double> FeatureExtractor::region_feature(const Region& region) {
  const auto frame = region.bounds();
  if (!frame) return std::vector<double>(encoding_.feature_dim(), 0.0);
  const Bitmask mask =
      rasterize(region.translated(-frame->x1, -frame->y1), {frame->width(), frame->height()});
  return masked_feature(*frame, mask);
}

std::vector<double> region_feature(const GrayImage& crop, const Bitmask& mask,
                                   const BowEncoding& encoding) {
  FeatureExtractor extractor(crop, encoding);
  return extractor.masked_feature(crop.extent().rect(), mask);
}

double classify_region(const GrayImage& crop, const Bitmask& mask, const BowEncoding& encoding,
                       const LinearScorer& scorer) {
  return scorer.score(region_feature(crop, mask, encoding));
}

LinearScorer train_linear_classifier(const RowMatrix& features, std::span<const int> labels,
                                     const SmoParams& params) {
  const SvmModel model = smo_train(features, labels, KernelSpec::linear(), params);
  return {model.weights, model.bias};
}

}  // namespace regionlift
