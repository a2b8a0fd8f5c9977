#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "regionlift/bow.hpp"
#include "regionlift/config.hpp"
#include "regionlift/dataset.hpp"
#include "regionlift/evaluation.hpp"
#include "regionlift/image.hpp"
#include "regionlift/io.hpp"
#include "regionlift/model_io.hpp"
#include "regionlift/supporting_regions.hpp"

namespace regionlift {

/// Pixels of a manifest entry. Must be callable from several threads.
using ImageProvider = std::function<GrayImage(const ImageInfo&)>;

/// Loads images from disk, resolving relative paths against the manifest.
ImageProvider disk_images(const AnnotationFile& annotations);
/// Serves images held in memory; the map must outlive the provider.
ImageProvider memory_images(const std::map<std::string, GrayImage>& images);

/// Classification score of every ranked box of one image, in ranked order.
/// Called concurrently for different images.
using BoxScorer = std::function<std::vector<double>(
    const ImageInfo& info, const RankedDetections& ranked, const SupportSet& supports)>;

/// Scores each supporting region with the bundle's classifier for the box's
/// category. Throws std::invalid_argument when the encoding is missing and
/// std::out_of_range when a box's category has no classifier.
BoxScorer bow_scorer(const ModelBundle& bundle, ImageProvider images);

/// +1 for boxes that the evaluator would count as true positives, -1 for the
/// rest. Needs ground truth, so only useful for upper-bound experiments.
BoxScorer oracle_scorer(const GroundTruthSet& truth, const MatchOptions& match = {});

/// Worker count: REGIONLIFT_THREADS when set (>= 1), else the hardware count.
unsigned worker_count();

/// Runs body(i) for i in [0, n) on up to `workers` threads. The first
/// exception (lowest index) is rethrown after all workers finish.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body);

/// Codebook from a seeded subsample of dense descriptors inside ground-truth
/// boxes.
BowEncoding train_codebook(const AnnotationFile& annotations, const ImageProvider& images,
                           const RunConfig& config);

/// One-vs-rest linear classifier per category, trained on pooled features
/// of the dataset regions.
std::map<int, LinearScorer> train_region_classifiers(const AnnotationFile& annotations,
                                                     const RegionDataset& dataset,
                                                     const ImageProvider& images,
                                                     const BowEncoding& encoding,
                                                     const RunConfig& config);

/// Thresholded detections with their classification scores.
struct ClassifiedDetections {
  std::vector<Detection> detections;
  std::vector<double> classification;
  std::map<int, std::size_t> retained_per_category;
};

/// threshold -> rank per image -> supporting regions -> classify. Output
/// keeps the input order of the surviving detections.
ClassifiedDetections classify_detections(const AnnotationFile& annotations,
                                         const DetectionFile& detections, const RunConfig& config,
                                         const BoxScorer& scorer);

/// Rescoring features of every classified detection, in order.
std::vector<std::vector<double>> rescore_features(const AnnotationFile& annotations,
                                                  const ClassifiedDetections& classified);

struct RescorerTraining {
  std::map<int, SvmModel> models;
  std::set<int> skipped;
  std::vector<std::string> warnings;
};

/// RBF rescorer per category; labels come from matching against ground
/// truth. A category whose samples carry a single label is skipped.
RescorerTraining train_rescorers(const AnnotationFile& annotations,
                                 const ClassifiedDetections& classified, const RunConfig& config);

struct CascadeResult {
  RunConfig config;
  DetectionFile rescored;
  std::vector<double> classification;
  EvalReport baseline;
  EvalReport report;
  std::vector<std::string> warnings;
};

/// Full workflow over one detection file. Baseline is the evaluation of the
/// thresholded input. With FusionMode::rescore, `rescorers` must cover each
/// category that has detections, except those listed in `rescore_skipped`.
CascadeResult run_cascade(const RunConfig& config, const AnnotationFile& annotations,
                          const DetectionFile& detections, const BoxScorer& scorer,
                          const std::map<int, SvmModel>& rescorers = {},
                          const std::set<int>& rescore_skipped = {});

CascadeResult run_cascade(const ModelBundle& bundle, const AnnotationFile& annotations,
                          const DetectionFile& detections, const ImageProvider& images);

/// Mean AP plus per-category counts and AP.
nlohmann::json eval_json(const EvalReport& report);

/// report.json contents: config, per-category AP for baseline and output.
nlohmann::json report_json(const CascadeResult& result);

/// Writes detections.jsonl, report.json, config.json and pr_<name>.csv.
void write_run_outputs(const CascadeResult& result, const std::filesystem::path& out_dir);

}  // namespace regionlift
