#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "regionlift/cascade.hpp"
#include "regionlift/simulate.hpp"

using namespace regionlift;
namespace fs = std::filesystem;

namespace {

const char* kAnnotations = R"({"type":"category","id":0,"name":"cat"}
{"type":"category","id":1,"name":"dog"}
{"type":"image","id":"a","path":"a.pgm","width":20,"height":10}
{"type":"object","image":"a","category":0,"bbox":[0,0,5,5]}
)";

AnnotationFile parse(const std::string& text) {
  std::istringstream in(text);
  return parse_annotations(in, "test");
}

DetectionFile parse_dets(const std::string& text, const AnnotationFile& manifest) {
  std::istringstream in(text);
  return parse_detections(in, "dets", manifest);
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("regionlift_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

SceneParams small_scene() {
  SceneParams p;
  p.images = 30;
  p.width = p.height = 64;
  p.min_size = 16;
  p.max_size = 24;
  return p;
}

}  // namespace

TEST_CASE("annotation and detection files") {
  const AnnotationFile a = parse(kAnnotations);
  CHECK(a.category_count() == 2);
  CHECK(a.objects.at("a").size() == 1);

  std::ostringstream out;
  write_annotations(out, a);
  const AnnotationFile b = parse(out.str());
  CHECK(b.categories == a.categories);
  CHECK(b.objects == a.objects);
  CHECK(b.images.size() == 1);

  CHECK(parse_dets("", a).records.empty());
  const DetectionFile d = parse_dets(R"({"image":"a","category":1,"bbox":[1,1,4,4],"score":-0.25})", a);
  std::ostringstream dout;
  write_detections(dout, d);
  CHECK(parse_dets(dout.str(), a).records == d.records);

  const std::string inclusive =
      R"({"type":"header","format":"regionlift.detections","version":1,"coordinates":"inclusive"}
{"image":"a","category":0,"bbox":[0,0,4,4],"score":1.0})";
  CHECK(parse_dets(inclusive, a).records[0].box.rect == Rect{0, 0, 5, 5});
  const std::string overflow =
      R"({"type":"header","coordinates":"inclusive"}
{"image":"a","category":0,"bbox":[0,0,19,10],"score":1.0})";
  CHECK_THROWS_AS(parse_dets(overflow, a), FormatError);
}

TEST_CASE("format errors carry their location") {
  auto message = [](auto&& fn) {
    try {
      fn();
    } catch (const FormatError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  const AnnotationFile a = parse(kAnnotations);
  CHECK(message([&] { parse_dets("\n{\"image\":\"zz\",\"category\":0,\"bbox\":[0,0,1,1],\"score\":0}", a); })
            .rfind("dets:2:", 0) == 0);
  CHECK(message([&] { parse_dets(R"({"image":"a","category":5,"bbox":[0,0,1,1],"score":0})", a); })
            .find("unknown category") != std::string::npos);
  CHECK(message([&] { parse_dets(R"({"image":"a","category":0,"bbox":[3,0,1,1],"score":0})", a); })
            .find("degenerate") != std::string::npos);
  CHECK(message([&] { parse_dets(R"({"image":"a","category":0,"bbox":[0,0,1,1]})", a); })
            .find("'score'") != std::string::npos);
  CHECK(message([&] { parse("{not json"); }).rfind("test:1:", 0) == 0);
  CHECK_THROWS_AS(parse(R"({"type":"image","id":"a","path":"x","width":2,"height":2})"), FormatError);
  CHECK_THROWS_AS(parse(std::string(kAnnotations) + R"({"type":"image","id":"a","path":"b","width":2,"height":2})"),
                  FormatError);
}

TEST_CASE("run configuration") {
  RunConfig c;
  c.seed = 42;
  c.support.orientation = Orientation::lower;
  c.fusion = FusionMode::rescore;
  c.fusion_weight = 0.3;
  c.pyramid.levels = {{1, 1}, {3, 3}};
  c.dataset_policy = DatasetPolicy::gt_plus_false_alarms;
  const RunConfig back = config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(to_json(RunConfig{})["detection_threshold"] == -0.95);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"bogus", 1}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"fusion", "both"}}), std::invalid_argument);
  RunConfig bad;
  bad.llc.neighbors = 0;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = RunConfig{};
  bad.support.margin_frac = -1;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
}

TEST_CASE("region datasets") {
  AnnotationFile a;
  a.categories = {{0, "x"}, {1, "y"}};
  a.images.push_back({"i", "i.pgm", 100, 100});
  auto& gt = a.objects["i"];
  for (int k = 0; k < 3; ++k) {
    gt.push_back({{k * 10, 0, k * 10 + 8, 8}, 0, 0});
    gt.push_back({{k * 10, 50, k * 10 + 8, 58}, 0, 1});
  }
  const RegionDataset d = build_region_dataset(a, {}, DatasetPolicy::gt_only, 1);
  for (int c : {0, 1}) {
    CHECK(d.count(c, 1) == 3);
    CHECK(d.count(c, -1) == 3);
  }

  DetectionFile dets;
  for (int k = 0; k < 8; ++k) dets.records.push_back({"i", {{k * 10, 80, k * 10 + 9, 95}, 0.1 * k, 0}});
  dets.records.push_back({"i", {{0, 0, 8, 8}, 0.9, 0}});
  dets.records.push_back({"i", {{5, 5, 40, 40}, 0.5, 0}});
  const RegionDataset f = build_region_dataset(a, dets, DatasetPolicy::gt_plus_false_alarms, 7);
  CHECK(f.count(0, 1) == 3);
  CHECK(f.count(0, -1) == 3);
  for (const RegionSample& s : f.samples) {
    if (s.label != -1) continue;
    for (const BoundingBox& g : gt) CHECK(intersect(s.region, g.rect).empty());
  }
  CHECK(build_region_dataset(a, dets, DatasetPolicy::gt_plus_false_alarms, 7) == f);

  AnnotationFile lonely = a;
  lonely.categories[2] = "z";
  CHECK_THROWS_AS(build_region_dataset(lonely, {}, DatasetPolicy::gt_only, 1), std::invalid_argument);

  const fs::path dir = scratch("dataset");
  save_region_dataset(f, dir / "regions.jsonl");
  CHECK(load_region_dataset(dir / "regions.jsonl", a) == f);
}

TEST_CASE("simulator") {
  SceneParams p = small_scene();
  const SimulatedData s1 = simulate(3, p);
  const SimulatedData s2 = simulate(3, p);
  CHECK(s1.detections.records == s2.detections.records);
  CHECK(s1.images == s2.images);

  const EvalReport noisy = evaluate_dataset(s1.detections.records, s1.annotations.objects,
                                            s1.annotations.categories);
  CHECK(noisy.mean_ap < 1.0);

  p.fp_rate = 0.0;
  p.score_noise = 0.0;
  const SimulatedData clean = simulate(3, p);
  const EvalReport perfect = evaluate_dataset(clean.detections.records, clean.annotations.objects,
                                              clean.annotations.categories);
  CHECK(perfect.mean_ap == 1.0);

  p.min_size = 100;
  CHECK_THROWS_AS(simulate(1, p), std::invalid_argument);

  const fs::path dir = scratch("sim");
  write_simulation(s1, dir);
  const AnnotationFile a = load_annotations(dir / "annotations.jsonl");
  CHECK(load_detections(dir / "detections.jsonl", a).records == s1.detections.records);
  const auto& first = a.images.front();
  CHECK(disk_images(a)(first) == s1.images.at(first.id));
}

TEST_CASE("model container") {
  const SimulatedData sim = simulate(9, small_scene());
  RunConfig cfg;
  cfg.seed = 4;
  cfg.codebook_size = 16;
  cfg.kmeans_samples = 2000;
  ModelBundle bundle;
  bundle.config = cfg;
  bundle.encoding = train_codebook(sim.annotations, memory_images(sim.images), cfg);
  const RegionDataset ds = build_region_dataset(sim.annotations, sim.detections, cfg.dataset_policy, cfg.seed);
  bundle.classifiers = train_region_classifiers(sim.annotations, ds, memory_images(sim.images), *bundle.encoding, cfg);
  const ClassifiedDetections classified =
      classify_detections(sim.annotations, sim.detections, cfg, bow_scorer(bundle, memory_images(sim.images)));
  const RescorerTraining rescore = train_rescorers(sim.annotations, classified, cfg);
  bundle.rescorers = rescore.models;
  bundle.rescore_skipped = rescore.skipped;

  const std::string bytes = serialize_model(bundle);
  const ModelBundle back = deserialize_model(bytes);
  CHECK(serialize_model(back) == bytes);
  CHECK(back.encoding->codebook.centers == bundle.encoding->codebook.centers);
  for (const auto& [c, m] : bundle.classifiers) {
    CHECK(back.classifiers.at(c).weights == m.weights);
    CHECK(back.classifiers.at(c).bias == m.bias);
  }

  // reloaded models classify every region identically
  const auto& info = sim.annotations.images.front();
  FeatureExtractor before(sim.images.at(info.id), *bundle.encoding);
  FeatureExtractor after(sim.images.at(info.id), *back.encoding);
  for (const auto& g : sim.annotations.objects.at(info.id)) {
    for (const auto& [c, m] : bundle.classifiers) {
      CHECK(back.classifiers.at(c).score(after.region_feature(Region(g.rect))) ==
            m.score(before.region_feature(Region(g.rect))));
    }
  }

  CHECK_THROWS_WITH_AS(deserialize_model(bytes.substr(0, bytes.size() / 2)), doctest::Contains("checksum"),
                       std::runtime_error);
  CHECK_THROWS_AS(deserialize_model(bytes.substr(0, 10)), std::runtime_error);
  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x01;
  CHECK_THROWS_AS(deserialize_model(flipped), std::runtime_error);
  std::string versioned = bytes;
  versioned[8] = 9;
  CHECK_THROWS_WITH_AS(deserialize_model(versioned), doctest::Contains("version"), std::runtime_error);

  const fs::path dir = scratch("model");
  save_model(bundle, dir / "m.bin");
  CHECK(serialize_model(load_model(dir / "m.bin")) == bytes);
}

TEST_CASE("cascade") {
  const SimulatedData sim = simulate(21, small_scene());
  RunConfig cfg;
  cfg.seed = 1;
  const BoxScorer oracle_cls = oracle_scorer(sim.annotations.objects);

  cfg.fusion_weight = 0.0;
  const CascadeResult zero = run_cascade(cfg, sim.annotations, sim.detections, oracle_cls);
  CHECK(zero.report.mean_ap == zero.baseline.mean_ap);

  cfg.fusion_weight = 1.0;
  const CascadeResult lifted = run_cascade(cfg, sim.annotations, sim.detections, oracle_cls);
  CHECK(lifted.report.mean_ap > lifted.baseline.mean_ap);
  CHECK(lifted.report.mean_ap == 1.0);
  CHECK(report_json(lifted).dump() ==
        report_json(run_cascade(cfg, sim.annotations, sim.detections, oracle_cls)).dump());

  ModelBundle empty;
  empty.config = cfg;
  empty.encoding = BowEncoding{};
  empty.encoding->codebook.centers = RowMatrix::Zero(4, kLbpBins);
  CHECK_THROWS_AS(run_cascade(empty, sim.annotations, sim.detections, memory_images(sim.images)),
                  std::out_of_range);

  cfg.fusion = FusionMode::rescore;
  CHECK_THROWS_AS(run_cascade(cfg, sim.annotations, sim.detections, oracle_cls), std::out_of_range);
  const std::set<int> all{0, 1, 2};
  const CascadeResult fallback = run_cascade(cfg, sim.annotations, sim.detections, oracle_cls, {}, all);
  CHECK(fallback.report.mean_ap == lifted.report.mean_ap);
  CHECK(fallback.warnings.size() == 3);

  const ClassifiedDetections classified = classify_detections(sim.annotations, sim.detections, cfg, oracle_cls);
  const RescorerTraining rt = train_rescorers(sim.annotations, classified, cfg);
  const CascadeResult rescored =
      run_cascade(cfg, sim.annotations, sim.detections, oracle_cls, rt.models, rt.skipped);
  CHECK(rescored.report.mean_ap >= lifted.report.mean_ap - 1e-12);

  const fs::path dir = scratch("run");
  write_run_outputs(lifted, dir);
  CHECK(load_detections(dir / "detections.jsonl", sim.annotations).records == lifted.rescored.records);
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "config.json"));
  for (const auto& [id, name] : sim.annotations.categories) CHECK(fs::exists(dir / ("pr_" + name + ".csv")));
}

TEST_CASE("worker pool") {
  std::vector<int> out(100, 0);
  parallel_for(out.size(), 4, [&](std::size_t i) { out[i] = static_cast<int>(i * i); });
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<int>(i * i));
  CHECK_THROWS_WITH(parallel_for(50, 4,
                                 [](std::size_t i) {
                                   if (i == 7 || i == 30) throw std::runtime_error(std::to_string(i));
                                 }),
                    "7");
}
