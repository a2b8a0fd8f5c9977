#include "regionlift/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace regionlift {

std::vector<Detection> rank_by_score(std::vector<Detection> detections) {
  std::stable_sort(detections.begin(), detections.end(),
                   [](const Detection& a, const Detection& b) { return a.box.score > b.box.score; });
  return detections;
}

MatchResult match_detections(std::span<const Detection> ranked, const GroundTruthSet& gt,
                             int category, const MatchOptions& options) {
  for (std::size_t i = 1; i < ranked.size(); ++i) {
    if (ranked[i].box.score > ranked[i - 1].box.score) {
      throw std::invalid_argument("detections must be sorted by descending score");
    }
  }
  MatchResult result;
  result.ranked.assign(ranked.begin(), ranked.end());
  result.true_positive.assign(ranked.size(), false);
  for (const auto& [image, boxes] : gt) {
    result.gt_matched[image].assign(boxes.size(), false);
    for (const BoundingBox& b : boxes) {
      if (b.category_id == category) ++result.total_gt;
    }
  }

  for (std::size_t d = 0; d < ranked.size(); ++d) {
    const Detection& det = ranked[d];
    auto it = gt.find(det.image_id);
    if (it == gt.end()) continue;
    auto& matched = result.gt_matched[det.image_id];
    double best = -1.0;
    std::size_t best_idx = 0;
    for (std::size_t g = 0; g < it->second.size(); ++g) {
      const BoundingBox& truth = it->second[g];
      if (truth.category_id != category || matched[g]) continue;
      const double overlap = iou(det.box.rect, truth.rect);
      if (overlap > best) {
        best = overlap;
        best_idx = g;
      }
    }
    const bool pass = options.strict ? best > options.iou_threshold
                                     : best >= options.iou_threshold;
    if (best >= 0.0 && pass) {
      matched[best_idx] = true;
      result.true_positive[d] = true;
    }
  }
  return result;
}

std::vector<PrPoint> pr_curve(const MatchResult& match, std::size_t total_gt) {
  if (total_gt == 0) throw std::invalid_argument("precision/recall undefined without ground truth");
  std::vector<PrPoint> curve;
  curve.reserve(match.true_positive.size());
  std::size_t tp = 0;
  for (std::size_t i = 0; i < match.true_positive.size(); ++i) {
    if (match.true_positive[i]) ++tp;
    curve.push_back({static_cast<double>(tp) / static_cast<double>(total_gt),
                     static_cast<double>(tp) / static_cast<double>(i + 1)});
  }
  return curve;
}

double interpolated_ap(std::span<const PrPoint> curve) {
  // Suffix maxima of precision give max{p(r') : r' >= r} in one pass.
  std::vector<double> best_from(curve.size() + 1, 0.0);
  for (std::size_t i = curve.size(); i-- > 0;) {
    best_from[i] = std::max(best_from[i + 1], curve[i].precision);
  }
  double sum = 0.0;
  std::size_t cursor = 0;
  for (int level = 0; level <= 10; ++level) {
    const double r = level / 10.0;
    // Recall is non-decreasing along the ranked list.
    while (cursor < curve.size() && curve[cursor].recall < r) ++cursor;
    sum += best_from[cursor];
  }
  return sum / 11.0;
}

const CategoryEval* EvalReport::find(int category_id) const {
  for (const auto& c : categories) {
    if (c.category_id == category_id) return &c;
  }
  return nullptr;
}

EvalReport evaluate_dataset(std::span<const Detection> detections, const GroundTruthSet& gt,
                            const std::map<int, std::string>& categories,
                            const MatchOptions& options) {
  std::map<int, std::vector<Detection>> by_category;
  for (const auto& [id, name] : categories) by_category[id];
  for (const Detection& d : detections) {
    auto it = by_category.find(d.box.category_id);
    if (it == by_category.end()) {
      throw std::invalid_argument("detection has unknown category id " +
                                  std::to_string(d.box.category_id));
    }
    it->second.push_back(d);
  }

  EvalReport report;
  double ap_sum = 0.0;
  std::size_t counted = 0;
  for (auto& [id, dets] : by_category) {
    CategoryEval eval;
    eval.category_id = id;
    eval.name = categories.at(id);
    const auto ranked = rank_by_score(std::move(dets));
    const MatchResult match = match_detections(ranked, gt, id, options);
    eval.total_gt = match.total_gt;
    eval.true_positive = match.true_positive;
    eval.scores.reserve(ranked.size());
    for (const Detection& d : ranked) eval.scores.push_back(d.box.score);
    if (eval.total_gt > 0) {
      eval.curve = pr_curve(match, eval.total_gt);
      eval.ap = interpolated_ap(eval.curve);
      ap_sum += eval.ap;
      ++counted;
    }
    report.categories.push_back(std::move(eval));
  }
  report.mean_ap = counted > 0 ? ap_sum / static_cast<double>(counted) : 0.0;
  return report;
}

void write_pr_csv(std::ostream& out, const CategoryEval& eval) {
  out << "rank,score,tp,recall,precision\n";
  char buf[128];
  for (std::size_t i = 0; i < eval.curve.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%d,%.17g,%.17g\n", i + 1, eval.scores[i],
                  eval.true_positive[i] ? 1 : 0, eval.curve[i].recall, eval.curve[i].precision);
    out << buf;
  }
}

}  // namespace regionlift
