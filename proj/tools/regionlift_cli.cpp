// regionlift command line: simulation, training stages, region dumps, cascade
// runs and evaluation. Errors go to stderr as a single JSON object.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "regionlift/cascade.hpp"
#include "regionlift/config.hpp"
#include "regionlift/dataset.hpp"
#include "regionlift/io.hpp"
#include "regionlift/model_io.hpp"
#include "regionlift/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace regionlift;

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> orientation;
  std::optional<double> margin_frac;
  std::optional<double> threshold;
  std::optional<std::string> fusion;
  std::optional<double> weight;
  std::optional<std::string> policy;
};

void add_config_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--orientation", o.orientation, "higher or lower");
  cmd->add_option("--margin-frac", o.margin_frac, "local background margin");
  cmd->add_option("--threshold", o.threshold, "detection score threshold (default -0.95)");
  cmd->add_option("--fusion", o.fusion, "simple or rescore");
  cmd->add_option("--weight", o.weight, "simple fusion weight");
  cmd->add_option("--policy", o.policy, "gt-only or gt-plus-false-alarms");
}

// Config file on top of `base`, then individual flags on top of that.
RunConfig resolve(const Overrides& o, RunConfig base = {}) {
  RunConfig c = std::move(base);
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw std::invalid_argument(o.config_path + ": " + e.what());
    }
    c = config_from_json(j, c);
  }
  if (o.seed) c.seed = *o.seed;
  if (o.orientation) c.support.orientation = parse_orientation(*o.orientation);
  if (o.margin_frac) c.support.margin_frac = *o.margin_frac;
  if (o.threshold) c.detection_threshold = *o.threshold;
  if (o.fusion) c.fusion = parse_fusion(*o.fusion);
  if (o.weight) c.fusion_weight = *o.weight;
  if (o.policy) c.dataset_policy = parse_policy(*o.policy);
  validate(c);
  return c;
}

json region_json(const Region& r) {
  json rects = json::array();
  for (const Rect& b : r.rects()) rects.push_back({b.x1, b.y1, b.x2, b.y2});
  return {{"area", r.area()}, {"rects", rects}};
}

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

int fail(const std::string& kind, const std::string& message, int code) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Region-classifier rescoring of object detections"};
  app.require_subcommand(1);

  Overrides o;
  std::string annotations_path;
  std::string detections_path;
  std::string model_path;
  std::string dataset_path;
  std::string out_dir;
  std::string image_id;
  std::uint64_t seed = 0;

  // simulate
  SceneParams scene;
  auto* sim = app.add_subcommand("simulate", "generate a synthetic textured benchmark");
  sim->add_option("--seed", seed, "generator seed")->required();
  sim->add_option("--out-dir", out_dir, "output directory")->required();
  sim->add_option("--images", scene.images, "number of images");
  sim->add_option("--categories", scene.categories, "number of texture categories");
  sim->add_option("--width", scene.width, "image width");
  sim->add_option("--height", scene.height, "image height");
  sim->add_option("--fp-rate", scene.fp_rate, "false positives per object");
  sim->add_option("--miss-rate", scene.miss_rate, "probability an object is not detected");
  sim->add_option("--score-noise", scene.score_noise, "detector score noise sigma");
  sim->add_option("--prefix", scene.id_prefix, "image id prefix");

  // build-dataset
  auto* build = app.add_subcommand("build-dataset", "build the region training set");
  build->add_option("--annotations", annotations_path)->required()->check(CLI::ExistingFile);
  build->add_option("--detections", detections_path, "needed for gt-plus-false-alarms")->check(CLI::ExistingFile);
  build->add_option("--seed", seed, "sampling seed")->required();
  build->add_option("--out-dir", out_dir)->required();
  add_config_flags(build, o);

  // train-codebook
  auto* codebook = app.add_subcommand("train-codebook", "cluster dense descriptors into a codebook");
  codebook->add_option("--annotations", annotations_path)->required()->check(CLI::ExistingFile);
  codebook->add_option("--seed", seed)->required();
  codebook->add_option("--model", model_path, "model file to write")->required();
  add_config_flags(codebook, o);

  // train-classifier
  auto* classifier = app.add_subcommand("train-classifier", "train one region classifier per category");
  classifier->add_option("--annotations", annotations_path)->required()->check(CLI::ExistingFile);
  classifier->add_option("--model", model_path, "model file holding a codebook; updated in place")
      ->required()
      ->check(CLI::ExistingFile);
  classifier->add_option("--dataset", dataset_path, "region dataset from build-dataset")->check(CLI::ExistingFile);
  classifier->add_option("--detections", detections_path, "build the dataset on the fly")->check(CLI::ExistingFile);
  classifier->add_option("--seed", seed)->required();

  // train-rescorer
  auto* rescorer = app.add_subcommand("train-rescorer", "train the per-category rescoring SVMs");
  rescorer->add_option("--annotations", annotations_path)->required()->check(CLI::ExistingFile);
  rescorer->add_option("--detections", detections_path)->required()->check(CLI::ExistingFile);
  rescorer->add_option("--model", model_path, "model file with classifiers; updated in place")
      ->required()
      ->check(CLI::ExistingFile);
  rescorer->add_option("--seed", seed)->required();
  add_config_flags(rescorer, o);

  // regions
  auto* regions = app.add_subcommand("regions", "dump the supporting regions of one image");
  regions->add_option("--annotations", annotations_path)->required()->check(CLI::ExistingFile);
  regions->add_option("--detections", detections_path)->required()->check(CLI::ExistingFile);
  regions->add_option("--image", image_id, "image id")->required();
  add_config_flags(regions, o);

  // run
  auto* run = app.add_subcommand("run", "classify, fuse and evaluate detections");
  run->add_option("--annotations", annotations_path)->required()->check(CLI::ExistingFile);
  run->add_option("--detections", detections_path)->required()->check(CLI::ExistingFile);
  run->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  run->add_option("--out-dir", out_dir)->required();
  add_config_flags(run, o);

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a detection file");
  eval->add_option("--annotations", annotations_path)->required()->check(CLI::ExistingFile);
  eval->add_option("--detections", detections_path)->required()->check(CLI::ExistingFile);
  eval->add_option("--threshold", o.threshold, "drop detections scoring below this");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (sim->parsed()) {
      const SimulatedData data = simulate(seed, scene);
      write_simulation(data, out_dir);
      print_json({{"images", data.annotations.images.size()},
                  {"detections", data.detections.records.size()},
                  {"out_dir", out_dir}});
    } else if (build->parsed()) {
      const RunConfig config = resolve(o);
      const AnnotationFile ann = load_annotations(annotations_path);
      const DetectionFile dets = detections_path.empty() ? DetectionFile{} : load_detections(detections_path, ann);
      const RegionDataset ds = build_region_dataset(ann, dets, config.dataset_policy, seed, config.support);
      fs::create_directories(out_dir);
      save_region_dataset(ds, fs::path(out_dir) / "regions.jsonl");
      print_json({{"samples", ds.samples.size()}, {"path", (fs::path(out_dir) / "regions.jsonl").string()}});
    } else if (codebook->parsed()) {
      o.seed = seed;
      ModelBundle bundle;
      bundle.config = resolve(o);
      const AnnotationFile ann = load_annotations(annotations_path);
      bundle.encoding = train_codebook(ann, disk_images(ann), bundle.config);
      save_model(bundle, model_path);
      print_json({{"codebook_size", bundle.encoding->codebook.size()}, {"model", model_path}});
    } else if (classifier->parsed()) {
      ModelBundle bundle = load_model(model_path);
      if (!bundle.encoding) throw std::invalid_argument(model_path + ": model has no codebook");
      bundle.config.seed = seed;
      const AnnotationFile ann = load_annotations(annotations_path);
      RegionDataset ds;
      if (!dataset_path.empty()) {
        ds = load_region_dataset(dataset_path, ann);
      } else {
        const DetectionFile dets = detections_path.empty() ? DetectionFile{} : load_detections(detections_path, ann);
        ds = build_region_dataset(ann, dets, bundle.config.dataset_policy, seed, bundle.config.support);
      }
      bundle.classifiers = train_region_classifiers(ann, ds, disk_images(ann), *bundle.encoding, bundle.config);
      save_model(bundle, model_path);
      print_json({{"categories", bundle.classifiers.size()}, {"samples", ds.samples.size()}, {"model", model_path}});
    } else if (rescorer->parsed()) {
      ModelBundle bundle = load_model(model_path);
      o.seed = seed;
      bundle.config = resolve(o, bundle.config);
      const AnnotationFile ann = load_annotations(annotations_path);
      const DetectionFile dets = load_detections(detections_path, ann);
      const ClassifiedDetections classified =
          classify_detections(ann, dets, bundle.config, bow_scorer(bundle, disk_images(ann)));
      const RescorerTraining trained = train_rescorers(ann, classified, bundle.config);
      bundle.rescorers = trained.models;
      bundle.rescore_skipped = trained.skipped;
      save_model(bundle, model_path);
      print_json({{"trained", trained.models.size()}, {"skipped", trained.skipped}, {"warnings", trained.warnings},
                  {"model", model_path}});
    } else if (regions->parsed()) {
      const RunConfig config = resolve(o);
      const AnnotationFile ann = load_annotations(annotations_path);
      const ImageInfo& info = ann.image(image_id);
      const DetectionFile dets = load_detections(detections_path, ann);
      std::vector<Detection> mine;
      for (const Detection& d : dets.records) {
        if (d.image_id == image_id) mine.push_back(d);
      }
      std::vector<BoundingBox> boxes;
      for (const Detection& d : threshold_filter(mine, config.detection_threshold).kept) boxes.push_back(d.box);
      const RankedDetections ranked = rank_detections(boxes, {info.width, info.height});
      const SupportSet set = build_support_set(ranked, config.support);
      json per_box = json::array();
      for (const SupportEntry& e : set.per_box) {
        const BoundingBox& b = ranked.boxes[e.index];
        per_box.push_back({{"rank", e.index},
                           {"category_id", b.category_id},
                           {"score", b.score},
                           {"box", {b.rect.x1, b.rect.y1, b.rect.x2, b.rect.y2}},
                           {"support", region_json(e.support)},
                           {"local_background", region_json(e.local_background)}});
      }
      print_json({{"image", image_id},
                  {"width", info.width},
                  {"height", info.height},
                  {"orientation", to_string(config.support.orientation)},
                  {"background", region_json(set.background)},
                  {"boxes", per_box}});
    } else if (run->parsed()) {
      ModelBundle bundle = load_model(model_path);
      bundle.config = resolve(o, bundle.config);
      const AnnotationFile ann = load_annotations(annotations_path);
      const DetectionFile dets = load_detections(detections_path, ann);
      const CascadeResult result = run_cascade(bundle, ann, dets, disk_images(ann));
      write_run_outputs(result, out_dir);
      for (const std::string& w : result.warnings) std::cerr << "warning: " << w << '\n';
      print_json({{"baseline_map", result.baseline.mean_ap},
                  {"output_map", result.report.mean_ap},
                  {"out_dir", out_dir}});
    } else if (eval->parsed()) {
      const AnnotationFile ann = load_annotations(annotations_path);
      const DetectionFile dets = load_detections(detections_path, ann);
      const auto kept = o.threshold ? threshold_filter(dets.records, *o.threshold).kept : dets.records;
      print_json(eval_json(evaluate_dataset(kept, ann.objects, ann.categories)));
    }
  } catch (const std::invalid_argument& e) {
    return fail("invalid_argument", e.what(), 1);
  } catch (const std::out_of_range& e) {
    return fail("out_of_range", e.what(), 1);
  } catch (const std::exception& e) {
    return fail("runtime_error", e.what(), 1);
  }
  return 0;
}
