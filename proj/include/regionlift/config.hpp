#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "regionlift/evaluation.hpp"
#include "regionlift/lbp.hpp"
#include "regionlift/llc.hpp"
#include "regionlift/rescoring.hpp"
#include "regionlift/spm.hpp"
#include "regionlift/supporting_regions.hpp"
#include "regionlift/svm.hpp"

namespace regionlift {

enum class FusionMode { simple, rescore };
enum class DatasetPolicy { gt_only, gt_plus_false_alarms };

/// Every tunable of a run. Serialised next to each run's outputs.
struct RunConfig {
  SupportOptions support;

  int codebook_size = 256;
  int kmeans_max_iters = 30;
  double kmeans_tol = 1e-4;
  std::size_t kmeans_samples = 20000;
  SamplingConfig sampling;
  LlcParams llc;
  PyramidConfig pyramid;

  SmoParams classifier_svm;
  RescoreParams rescore;

  double detection_threshold = kDefaultDetectionThreshold;
  FusionMode fusion = FusionMode::simple;
  double fusion_weight = 1.0;
  DatasetPolicy dataset_policy = DatasetPolicy::gt_only;
  MatchOptions match;

  std::uint64_t seed = 0;
};

/// Throws std::invalid_argument naming the first out-of-range field.
void validate(const RunConfig& config);

nlohmann::json to_json(const RunConfig& config);

/// Applies the keys present in `j` on top of `base`; unknown keys are an error.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});

RunConfig load_config(const std::filesystem::path& path);

std::string to_string(Orientation o);
std::string to_string(FusionMode m);
std::string to_string(DatasetPolicy p);
Orientation parse_orientation(const std::string& s);
FusionMode parse_fusion(const std::string& s);
DatasetPolicy parse_policy(const std::string& s);

}  // namespace regionlift
