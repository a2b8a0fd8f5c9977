#include "regionlift/rescoring.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace regionlift {

double alpha(double x) { return 1.0 / (1.0 + std::exp(-2.0 * x)); }

ImageContext image_context(std::span<const std::optional<double>> best_detection,
                           std::span<const std::optional<double>> best_classification) {
  if (best_detection.size() != best_classification.size() || best_detection.empty()) {
    throw std::invalid_argument("image context needs k >= 1 scores for both sources");
  }
  ImageContext ctx;
  ctx.f1.reserve(best_detection.size());
  ctx.f2.reserve(best_detection.size());
  for (const auto& s : best_detection) ctx.f1.push_back(s ? alpha(*s) : 0.0);
  for (const auto& s : best_classification) ctx.f2.push_back(s ? alpha(*s) : 0.0);
  return ctx;
}

std::vector<double> box_feature(const Rect& box, double detection_score,
                                double classification_score, const ImageContext& context,
                                const ImageExtent& extent) {
  if (!extent.contains(box)) throw std::invalid_argument("box outside image extent");
  std::vector<double> f;
  f.reserve(rescore_feature_dim(context.categories()));
  f.push_back(alpha(detection_score));
  f.push_back(alpha(classification_score));
  f.push_back(static_cast<double>(box.x1) / extent.width);
  f.push_back(static_cast<double>(box.y1) / extent.height);
  f.push_back(static_cast<double>(box.x2) / extent.width);
  f.push_back(static_cast<double>(box.y2) / extent.height);
  f.insert(f.end(), context.f1.begin(), context.f1.end());
  f.insert(f.end(), context.f2.begin(), context.f2.end());
  return f;
}

ThresholdResult threshold_filter(std::span<const Detection> detections, double threshold) {
  ThresholdResult out;
  for (const Detection& d : detections) {
    if (d.box.score >= threshold) {
      out.kept.push_back(d);
      ++out.retained_per_category[d.box.category_id];
    }
  }
  return out;
}

SvmModel rescore_train(std::span<const RescoreSample> samples, const RescoreParams& params) {
  if (samples.empty()) throw std::invalid_argument("no rescoring samples");
  const std::size_t dim = samples.front().feature.size();
  RowMatrix x(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(dim));
  std::vector<int> labels;
  labels.reserve(samples.size());
  bool varied = false;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].feature.size() != dim) throw std::invalid_argument("ragged rescoring features");
    for (std::size_t j = 0; j < dim; ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = samples[i].feature[j];
      if (samples[i].feature[j] != samples.front().feature[j]) varied = true;
    }
    labels.push_back(samples[i].label);
  }
  if (!varied) throw std::invalid_argument("rescoring features have zero variance");

  SmoParams smo;
  smo.C = params.C;
  smo.tol = params.tol;
  smo.max_passes = params.max_passes;
  smo.seed = params.seed;
  const double gamma = params.gamma > 0.0 ? params.gamma : 1.0 / static_cast<double>(dim);
  return smo_train(x, labels, KernelSpec::rbf(gamma), smo);
}

std::vector<double> rescore_apply(const SvmModel& model, std::size_t categories,
                                  std::span<const std::vector<double>> features) {
  const std::size_t expected = rescore_feature_dim(categories);
  if (model.dim() != expected) {
    throw std::invalid_argument("rescoring model was trained for " +
                                std::to_string(model.dim()) + " features, not " +
                                std::to_string(expected));
  }
  std::vector<double> scores;
  scores.reserve(features.size());
  for (const auto& f : features) {
    if (f.size() != expected) throw std::invalid_argument("rescoring feature length mismatch");
    scores.push_back(model.score(f));
  }
  return scores;
}

}  // namespace regionlift
