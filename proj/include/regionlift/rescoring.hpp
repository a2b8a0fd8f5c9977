#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "regionlift/evaluation.hpp"
#include "regionlift/geometry.hpp"
#include "regionlift/svm.hpp"

namespace regionlift {

/// Candidate cut used before rescoring.
inline constexpr double kDefaultDetectionThreshold = -0.95;

/// Logistic renormalisation 1 / (1 + exp(-2x)).
double alpha(double x);

/// Per-image summaries: alpha of the best detection and best classification
/// score of each category (0 for a category with no boxes in the image).
struct ImageContext {
  std::vector<double> f1;
  std::vector<double> f2;

  std::size_t categories() const { return f1.size(); }
};

/// Missing categories are passed as std::nullopt (equivalently -infinity).
ImageContext image_context(std::span<const std::optional<double>> best_detection,
                           std::span<const std::optional<double>> best_classification);

inline std::size_t rescore_feature_dim(std::size_t categories) { return 2 * categories + 6; }

/// [alpha(d), alpha(c), x1/W, y1/H, x2/W, y2/H, f1, f2]; length 2k + 6.
std::vector<double> box_feature(const Rect& box, double detection_score,
                                double classification_score, const ImageContext& context,
                                const ImageExtent& extent);

/// det + weight * cls.
inline double fuse_simple(double detection_score, double classification_score,
                          double weight = 1.0) {
  return detection_score + weight * classification_score;
}

struct ThresholdResult {
  std::vector<Detection> kept;
  std::map<int, std::size_t> retained_per_category;
};

/// Keeps detections with score >= threshold, preserving order.
ThresholdResult threshold_filter(std::span<const Detection> detections, double threshold);

struct RescoreSample {
  std::vector<double> feature;
  int label = -1;  // +1 when the box matches a same-category ground truth
};

struct RescoreParams {
  double C = 1.0;
  double tol = 1e-3;
  int max_passes = 5;
  /// RBF width; 0 selects 1 / feature dimension.
  double gamma = 0.0;
  std::uint64_t seed = 0;
};

/// RBF SVM over rescoring features. Throws std::invalid_argument when only
/// one label is present or every feature vector is identical.
SvmModel rescore_train(std::span<const RescoreSample> samples, const RescoreParams& params);

/// New score for each feature; geometry is the caller's to keep. Throws
/// std::invalid_argument when a feature length is not 2k + 6 for the given k
/// or does not match the model.
std::vector<double> rescore_apply(const SvmModel& model, std::size_t categories,
                                  std::span<const std::vector<double>> features);

}  // namespace regionlift
