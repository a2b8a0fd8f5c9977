#pragma once

#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "regionlift/geometry.hpp"

namespace regionlift {

/// A box attached to the image it was predicted on.
struct Detection {
  std::string image_id;
  BoundingBox box;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Ground-truth boxes per image id (category in BoundingBox::category_id).
using GroundTruthSet = std::map<std::string, std::vector<BoundingBox>>;

struct MatchOptions {
  double iou_threshold = 0.5;
  /// Require IoU > threshold instead of IoU >= threshold.
  bool strict = false;
};

struct MatchResult {
  std::vector<Detection> ranked;
  std::vector<bool> true_positive;
  /// Per image, one flag per ground-truth box of that image (all categories;
  /// boxes of other categories are never marked).
  std::map<std::string, std::vector<bool>> gt_matched;
  std::size_t total_gt = 0;
};

/// Sort by descending score, ties in input order.
std::vector<Detection> rank_by_score(std::vector<Detection> detections);

/// Greedy assignment in rank order. Each detection takes the still-unmatched
/// same-image, same-category ground-truth box of largest IoU if that IoU passes
/// the threshold; otherwise it is a false positive. Detections must already
/// be in rank order (std::invalid_argument otherwise).
MatchResult match_detections(std::span<const Detection> ranked, const GroundTruthSet& gt,
                             int category, const MatchOptions& options = {});

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
  friend bool operator==(const PrPoint&, const PrPoint&) = default;
};

/// Cumulative precision/recall after each ranked detection.
/// Throws std::invalid_argument when total_gt is zero.
std::vector<PrPoint> pr_curve(const MatchResult& match, std::size_t total_gt);

/// Eleven-point interpolated average precision.
double interpolated_ap(std::span<const PrPoint> curve);

struct CategoryEval {
  int category_id = 0;
  std::string name;
  std::size_t total_gt = 0;
  std::vector<double> scores;
  std::vector<bool> true_positive;
  std::vector<PrPoint> curve;
  double ap = 0.0;
};

struct EvalReport {
  std::vector<CategoryEval> categories;
  /// Mean over categories with at least one ground-truth box.
  double mean_ap = 0.0;

  const CategoryEval* find(int category_id) const;
};

/// Per-category AP and mAP. Throws std::invalid_argument for a detection
/// whose category is not listed.
EvalReport evaluate_dataset(std::span<const Detection> detections, const GroundTruthSet& gt,
                            const std::map<int, std::string>& categories,
                            const MatchOptions& options = {});

/// CSV with columns rank,score,tp,recall,precision.
void write_pr_csv(std::ostream& out, const CategoryEval& eval);

}  // namespace regionlift
