#include "regionlift/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

namespace regionlift {

using nlohmann::json;

std::string to_string(Orientation o) { return o == Orientation::higher ? "higher" : "lower"; }
std::string to_string(FusionMode m) { return m == FusionMode::simple ? "simple" : "rescore"; }
std::string to_string(DatasetPolicy p) {
  return p == DatasetPolicy::gt_only ? "gt-only" : "gt-plus-false-alarms";
}

Orientation parse_orientation(const std::string& s) {
  if (s == "higher") return Orientation::higher;
  if (s == "lower") return Orientation::lower;
  throw std::invalid_argument("orientation must be 'higher' or 'lower', got '" + s + "'");
}

FusionMode parse_fusion(const std::string& s) {
  if (s == "simple") return FusionMode::simple;
  if (s == "rescore") return FusionMode::rescore;
  throw std::invalid_argument("fusion must be 'simple' or 'rescore', got '" + s + "'");
}

DatasetPolicy parse_policy(const std::string& s) {
  if (s == "gt-only") return DatasetPolicy::gt_only;
  if (s == "gt-plus-false-alarms") return DatasetPolicy::gt_plus_false_alarms;
  throw std::invalid_argument("dataset policy must be 'gt-only' or 'gt-plus-false-alarms'");
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("config: ") + what);
}

}  // namespace

void validate(const RunConfig& c) {
  require(std::isfinite(c.support.margin_frac) && c.support.margin_frac >= 0.0,
          "margin_frac must be finite and >= 0");
  require(c.codebook_size >= 2, "codebook_size must be >= 2");
  require(c.kmeans_max_iters >= 1, "kmeans_max_iters must be >= 1");
  require(c.kmeans_tol >= 0.0, "kmeans_tol must be >= 0");
  require(c.kmeans_samples >= static_cast<std::size_t>(c.codebook_size),
          "kmeans_samples must be >= codebook_size");
  require(!c.sampling.patch_sizes.empty(), "patch_sizes must not be empty");
  for (int p : c.sampling.patch_sizes) require(p >= 3, "patch sizes must be >= 3");
  require(c.sampling.stride >= 0, "stride must be >= 0");
  require(c.llc.neighbors >= 1 && c.llc.neighbors <= c.codebook_size,
          "llc neighbors must lie in [1, codebook_size]");
  require(c.llc.lambda >= 0.0, "llc lambda must be >= 0");
  require(!c.pyramid.levels.empty(), "pyramid needs at least one level");
  for (const auto& l : c.pyramid.levels) require(l.rows >= 1 && l.cols >= 1, "bad pyramid level");
  require(c.classifier_svm.C > 0.0 && c.rescore.C > 0.0, "SVM C must be > 0");
  require(c.classifier_svm.tol > 0.0 && c.rescore.tol > 0.0, "SVM tol must be > 0");
  require(c.classifier_svm.max_passes >= 1 && c.rescore.max_passes >= 1,
          "SVM max_passes must be >= 1");
  require(c.rescore.gamma >= 0.0, "rescore gamma must be >= 0 (0 = 1/dim)");
  require(!std::isnan(c.detection_threshold), "detection_threshold must not be NaN");
  require(std::isfinite(c.fusion_weight), "fusion_weight must be finite");
  require(c.match.iou_threshold >= 0.0 && c.match.iou_threshold <= 1.0,
          "iou_threshold must lie in [0, 1]");
}

json to_json(const RunConfig& c) {
  json levels = json::array();
  for (const auto& l : c.pyramid.levels) levels.push_back({l.rows, l.cols});
  return json{
      {"orientation", to_string(c.support.orientation)},
      {"include_background", c.support.include_background},
      {"margin_frac", c.support.margin_frac},
      {"codebook_size", c.codebook_size},
      {"kmeans_max_iters", c.kmeans_max_iters},
      {"kmeans_tol", c.kmeans_tol},
      {"kmeans_samples", c.kmeans_samples},
      {"patch_sizes", c.sampling.patch_sizes},
      {"stride", c.sampling.stride},
      {"llc_neighbors", c.llc.neighbors},
      {"llc_lambda", c.llc.lambda},
      {"pyramid", levels},
      {"classifier_C", c.classifier_svm.C},
      {"classifier_tol", c.classifier_svm.tol},
      {"classifier_max_passes", c.classifier_svm.max_passes},
      {"rescore_C", c.rescore.C},
      {"rescore_tol", c.rescore.tol},
      {"rescore_max_passes", c.rescore.max_passes},
      {"rescore_gamma", c.rescore.gamma},
      {"detection_threshold", c.detection_threshold},
      {"fusion", to_string(c.fusion)},
      {"fusion_weight", c.fusion_weight},
      {"dataset_policy", to_string(c.dataset_policy)},
      {"iou_threshold", c.match.iou_threshold},
      {"strict_iou", c.match.strict},
      {"seed", c.seed},
  };
}

RunConfig config_from_json(const json& j, RunConfig c) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  static const std::set<std::string> known{
      "orientation", "include_background", "margin_frac", "codebook_size", "kmeans_max_iters",
      "kmeans_tol", "kmeans_samples", "patch_sizes", "stride", "llc_neighbors", "llc_lambda",
      "pyramid", "classifier_C", "classifier_tol", "classifier_max_passes", "rescore_C",
      "rescore_tol", "rescore_max_passes", "rescore_gamma", "detection_threshold", "fusion",
      "fusion_weight", "dataset_policy", "iou_threshold", "strict_iou", "seed"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  try {
    if (j.contains("orientation")) c.support.orientation = parse_orientation(j["orientation"]);
    if (j.contains("include_background")) c.support.include_background = j["include_background"];
    if (j.contains("margin_frac")) c.support.margin_frac = j["margin_frac"];
    if (j.contains("codebook_size")) c.codebook_size = j["codebook_size"];
    if (j.contains("kmeans_max_iters")) c.kmeans_max_iters = j["kmeans_max_iters"];
    if (j.contains("kmeans_tol")) c.kmeans_tol = j["kmeans_tol"];
    if (j.contains("kmeans_samples")) c.kmeans_samples = j["kmeans_samples"];
    if (j.contains("patch_sizes")) c.sampling.patch_sizes = j["patch_sizes"].get<std::vector<int>>();
    if (j.contains("stride")) c.sampling.stride = j["stride"];
    if (j.contains("llc_neighbors")) c.llc.neighbors = j["llc_neighbors"];
    if (j.contains("llc_lambda")) c.llc.lambda = j["llc_lambda"];
    if (j.contains("pyramid")) {
      c.pyramid.levels.clear();
      for (const auto& l : j["pyramid"]) c.pyramid.levels.push_back({l.at(0), l.at(1)});
    }
    if (j.contains("classifier_C")) c.classifier_svm.C = j["classifier_C"];
    if (j.contains("classifier_tol")) c.classifier_svm.tol = j["classifier_tol"];
    if (j.contains("classifier_max_passes")) c.classifier_svm.max_passes = j["classifier_max_passes"];
    if (j.contains("rescore_C")) c.rescore.C = j["rescore_C"];
    if (j.contains("rescore_tol")) c.rescore.tol = j["rescore_tol"];
    if (j.contains("rescore_max_passes")) c.rescore.max_passes = j["rescore_max_passes"];
    if (j.contains("rescore_gamma")) c.rescore.gamma = j["rescore_gamma"];
    if (j.contains("detection_threshold")) c.detection_threshold = j["detection_threshold"];
    if (j.contains("fusion")) c.fusion = parse_fusion(j["fusion"]);
    if (j.contains("fusion_weight")) c.fusion_weight = j["fusion_weight"];
    if (j.contains("dataset_policy")) c.dataset_policy = parse_policy(j["dataset_policy"]);
    if (j.contains("iou_threshold")) c.match.iou_threshold = j["iou_threshold"];
    if (j.contains("strict_iou")) c.match.strict = j["strict_iou"];
    if (j.contains("seed")) c.seed = j["seed"];
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open config");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace regionlift
