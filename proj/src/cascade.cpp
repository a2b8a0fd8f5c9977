#include "regionlift/cascade.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "regionlift/random.hpp"
#include "regionlift/rescoring.hpp"

namespace regionlift {

using nlohmann::json;

ImageProvider disk_images(const AnnotationFile& annotations) {
  const std::filesystem::path base = annotations.base_dir;
  return [base](const ImageInfo& info) {
    const std::filesystem::path p(info.path);
    GrayImage img = load_image(p.is_absolute() ? p : base / p);
    if (img.width != info.width || img.height != info.height) {
      throw std::runtime_error("image '" + info.id + "' is " + std::to_string(img.width) + "x" +
                               std::to_string(img.height) + ", manifest says " +
                               std::to_string(info.width) + "x" + std::to_string(info.height));
    }
    return img;
  };
}

ImageProvider memory_images(const std::map<std::string, GrayImage>& images) {
  return [&images](const ImageInfo& info) {
    auto it = images.find(info.id);
    if (it == images.end()) throw std::out_of_range("no pixels for image '" + info.id + "'");
    return it->second;
  };
}

unsigned worker_count() {
  if (const char* env = std::getenv("REGIONLIFT_THREADS"); env && *env) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 1) {
      throw std::invalid_argument("REGIONLIFT_THREADS must be a positive integer, got '" +
                                  std::string(env) + "'");
    }
    return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body) {
  const std::size_t threads = std::min<std::size_t>(std::max(1u, workers), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_at = n;
  std::exception_ptr failure;
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(run);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

namespace {

// True-positive flag per detection (input order), matching each category in
// rank order exactly as the evaluator does.
std::vector<bool> true_positive_flags(const std::vector<Detection>& detections,
                                      const GroundTruthSet& truth, const MatchOptions& match) {
  std::map<int, std::vector<std::size_t>> by_category;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    by_category[detections[i].box.category_id].push_back(i);
  }
  std::vector<bool> flags(detections.size(), false);
  for (auto& [category, idx] : by_category) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return detections[a].box.score > detections[b].box.score;
    });
    std::vector<Detection> ranked;
    for (std::size_t i : idx) ranked.push_back(detections[i]);
    const MatchResult m = match_detections(ranked, truth, category, match);
    for (std::size_t r = 0; r < idx.size(); ++r) flags[idx[r]] = m.true_positive[r];
  }
  return flags;
}

std::map<std::string, std::vector<std::size_t>> group_by_image(const std::vector<Detection>& d) {
  std::map<std::string, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < d.size(); ++i) out[d[i].image_id].push_back(i);
  return out;
}

}  // namespace

BoxScorer bow_scorer(const ModelBundle& bundle, ImageProvider images) {
  if (!bundle.encoding) throw std::invalid_argument("model has no feature encoding");
  return [&bundle, images = std::move(images)](const ImageInfo& info,
                                               const RankedDetections& ranked,
                                               const SupportSet& supports) {
    const GrayImage img = images(info);
    FeatureExtractor extractor(img, *bundle.encoding);
    std::vector<double> scores(ranked.size(), 0.0);
    for (const SupportEntry& e : supports.per_box) {
      const int category = ranked.boxes[e.index].category_id;
      auto it = bundle.classifiers.find(category);
      if (it == bundle.classifiers.end()) {
        throw std::out_of_range("no region classifier for category " + std::to_string(category));
      }
      scores[e.index] = it->second.score(extractor.region_feature(e.support));
    }
    return scores;
  };
}

BoxScorer oracle_scorer(const GroundTruthSet& truth, const MatchOptions& match) {
  return [truth, match](const ImageInfo& info, const RankedDetections& ranked, const SupportSet&) {
    std::vector<Detection> dets;
    for (const BoundingBox& b : ranked.boxes) dets.push_back({info.id, b});
    const std::vector<bool> tp = true_positive_flags(dets, truth, match);
    std::vector<double> scores(ranked.size());
    for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = tp[i] ? 1.0 : -1.0;
    return scores;
  };
}

BowEncoding train_codebook(const AnnotationFile& annotations, const ImageProvider& images,
                           const RunConfig& config) {
  std::vector<std::vector<Descriptor>> per_image(annotations.images.size());
  parallel_for(annotations.images.size(), worker_count(), [&](std::size_t n) {
    const ImageInfo& info = annotations.images[n];
    const auto& truth = annotations.objects.at(info.id);
    if (truth.empty()) return;
    const GrayImage img = images(info);
    for (const BoundingBox& g : truth) {
      const GrayImage patch = crop(img, g.rect);
      Bitmask mask = rasterize(Region(Rect{0, 0, patch.width, patch.height}), patch.extent());
      for (Descriptor& d : dense_sample(patch, mask, config.sampling)) {
        per_image[n].push_back(std::move(d));
      }
    }
  });

  std::vector<const std::vector<double>*> all;
  for (const auto& descs : per_image) {
    for (const Descriptor& d : descs) all.push_back(&d.values);
  }
  const std::size_t k = static_cast<std::size_t>(config.codebook_size);
  if (all.size() < k) {
    throw std::invalid_argument("only " + std::to_string(all.size()) +
                                " descriptors inside ground-truth boxes, codebook needs " +
                                std::to_string(k));
  }
  Rng rng(config.seed);
  const std::size_t take = std::min(all.size(), config.kmeans_samples);
  for (std::size_t i = 0; i < take; ++i) {
    std::swap(all[i], all[i + static_cast<std::size_t>(rng.below(all.size() - i))]);
  }
  RowMatrix data(static_cast<Eigen::Index>(take), kLbpBins);
  for (std::size_t i = 0; i < take; ++i) {
    for (int j = 0; j < kLbpBins; ++j) data(static_cast<Eigen::Index>(i), j) = (*all[i])[j];
  }

  KMeansParams km;
  km.clusters = config.codebook_size;
  km.seed = config.seed;
  km.max_iters = config.kmeans_max_iters;
  km.tol = config.kmeans_tol;
  BowEncoding enc;
  enc.codebook = kmeans_train(data, km).codebook;
  enc.sampling = config.sampling;
  enc.llc = config.llc;
  enc.pyramid = config.pyramid;
  return enc;
}

std::map<int, LinearScorer> train_region_classifiers(const AnnotationFile& annotations,
                                                     const RegionDataset& dataset,
                                                     const ImageProvider& images,
                                                     const BowEncoding& encoding,
                                                     const RunConfig& config) {
  std::map<std::string, std::vector<std::size_t>> by_image;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    by_image[dataset.samples[i].image_id].push_back(i);
  }
  std::vector<const std::pair<const std::string, std::vector<std::size_t>>*> work;
  for (const auto& entry : by_image) work.push_back(&entry);

  const std::size_t dim = encoding.feature_dim();
  RowMatrix features(static_cast<Eigen::Index>(dataset.samples.size()),
                     static_cast<Eigen::Index>(dim));
  parallel_for(work.size(), worker_count(), [&](std::size_t w) {
    const auto& [image_id, idx] = *work[w];
    const GrayImage img = images(annotations.image(image_id));
    FeatureExtractor extractor(img, encoding);
    for (std::size_t i : idx) {
      const std::vector<double> f = extractor.region_feature(dataset.samples[i].region);
      features.row(static_cast<Eigen::Index>(i)) =
          Eigen::Map<const Eigen::RowVectorXd>(f.data(), static_cast<Eigen::Index>(dim));
    }
  });

  std::map<int, std::vector<std::size_t>> by_category;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    by_category[dataset.samples[i].category_id].push_back(i);
  }
  std::map<int, LinearScorer> out;
  for (const auto& [category, idx] : by_category) {
    RowMatrix x(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(dim));
    std::vector<int> y(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      x.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(idx[r]));
      y[r] = dataset.samples[idx[r]].label;
    }
    SmoParams params = config.classifier_svm;
    params.seed = config.seed + static_cast<std::uint64_t>(category);
    out.emplace(category, train_linear_classifier(x, y, params));
  }
  return out;
}

ClassifiedDetections classify_detections(const AnnotationFile& annotations,
                                         const DetectionFile& detections, const RunConfig& config,
                                         const BoxScorer& scorer) {
  ThresholdResult filtered = threshold_filter(detections.records, config.detection_threshold);
  ClassifiedDetections out;
  out.detections = std::move(filtered.kept);
  out.retained_per_category = std::move(filtered.retained_per_category);
  out.classification.assign(out.detections.size(), 0.0);

  const auto groups = group_by_image(out.detections);
  std::vector<const std::pair<const std::string, std::vector<std::size_t>>*> work;
  for (const auto& entry : groups) work.push_back(&entry);
  parallel_for(work.size(), worker_count(), [&](std::size_t w) {
    const auto& [image_id, idx] = *work[w];
    const ImageInfo& info = annotations.image(image_id);
    std::vector<BoundingBox> boxes;
    for (std::size_t i : idx) boxes.push_back(out.detections[i].box);
    const RankedDetections ranked = rank_detections(std::move(boxes), info.extent());
    const SupportSet supports = build_support_set(ranked, config.support);
    const std::vector<double> scores = scorer(info, ranked, supports);
    if (scores.size() != ranked.size()) {
      throw std::logic_error("box scorer returned " + std::to_string(scores.size()) +
                             " scores for " + std::to_string(ranked.size()) + " boxes");
    }
    for (std::size_t r = 0; r < ranked.size(); ++r) {
      out.classification[idx[ranked.source_index[r]]] = scores[r];
    }
  });
  return out;
}

std::vector<std::vector<double>> rescore_features(const AnnotationFile& annotations,
                                                  const ClassifiedDetections& classified) {
  std::map<int, std::size_t> slot;
  for (const auto& [category, name] : annotations.categories) slot.emplace(category, slot.size());
  const std::size_t k = slot.size();

  std::vector<std::vector<double>> out(classified.detections.size());
  for (const auto& [image_id, idx] : group_by_image(classified.detections)) {
    std::vector<std::optional<double>> best_det(k), best_cls(k);
    for (std::size_t i : idx) {
      const std::size_t s = slot.at(classified.detections[i].box.category_id);
      const double d = classified.detections[i].box.score;
      const double c = classified.classification[i];
      if (!best_det[s] || d > *best_det[s]) best_det[s] = d;
      if (!best_cls[s] || c > *best_cls[s]) best_cls[s] = c;
    }
    const ImageContext context = image_context(best_det, best_cls);
    const ImageExtent extent = annotations.image(image_id).extent();
    for (std::size_t i : idx) {
      const Detection& d = classified.detections[i];
      out[i] = box_feature(d.box.rect, d.box.score, classified.classification[i], context, extent);
    }
  }
  return out;
}

RescorerTraining train_rescorers(const AnnotationFile& annotations,
                                 const ClassifiedDetections& classified, const RunConfig& config) {
  const std::vector<std::vector<double>> features = rescore_features(annotations, classified);
  const std::vector<bool> tp =
      true_positive_flags(classified.detections, annotations.objects, config.match);
  std::map<int, std::vector<RescoreSample>> samples;
  for (std::size_t i = 0; i < features.size(); ++i) {
    samples[classified.detections[i].box.category_id].push_back({features[i], tp[i] ? 1 : -1});
  }

  RescorerTraining out;
  for (const auto& [category, name] : annotations.categories) {
    auto it = samples.find(category);
    const auto positives = it == samples.end() ? 0
                           : std::count_if(it->second.begin(), it->second.end(),
                                           [](const RescoreSample& s) { return s.label == 1; });
    if (it == samples.end() || positives == 0 ||
        static_cast<std::size_t>(positives) == it->second.size()) {
      out.skipped.insert(category);
      out.warnings.push_back("rescorer for category " + std::to_string(category) + " ('" + name +
                             "') not trained: training boxes carry a single label");
      continue;
    }
    RescoreParams params = config.rescore;
    params.seed = config.seed + static_cast<std::uint64_t>(category);
    out.models.emplace(category, rescore_train(it->second, params));
  }
  return out;
}

CascadeResult run_cascade(const RunConfig& config, const AnnotationFile& annotations,
                          const DetectionFile& detections, const BoxScorer& scorer,
                          const std::map<int, SvmModel>& rescorers,
                          const std::set<int>& rescore_skipped) {
  validate(config);
  CascadeResult result;
  result.config = config;
  const ClassifiedDetections classified =
      classify_detections(annotations, detections, config, scorer);
  result.classification = classified.classification;
  result.baseline = evaluate_dataset(classified.detections, annotations.objects,
                                     annotations.categories, config.match);

  std::vector<Detection> fused = classified.detections;
  if (config.fusion == FusionMode::simple) {
    for (std::size_t i = 0; i < fused.size(); ++i) {
      fused[i].box.score =
          fuse_simple(fused[i].box.score, classified.classification[i], config.fusion_weight);
    }
  } else {
    const auto features = rescore_features(annotations, classified);
    std::map<int, std::vector<std::size_t>> by_category;
    for (std::size_t i = 0; i < fused.size(); ++i) by_category[fused[i].box.category_id].push_back(i);
    const std::size_t k = annotations.categories.size();
    for (const auto& [category, idx] : by_category) {
      auto model = rescorers.find(category);
      if (model == rescorers.end()) {
        if (!rescore_skipped.contains(category)) {
          throw std::out_of_range("no rescorer for category " + std::to_string(category));
        }
        result.warnings.push_back("category " + std::to_string(category) +
                                  ": no rescorer, using simple fusion");
        for (std::size_t i : idx) {
          fused[i].box.score =
              fuse_simple(fused[i].box.score, classified.classification[i], config.fusion_weight);
        }
        continue;
      }
      std::vector<std::vector<double>> f;
      for (std::size_t i : idx) f.push_back(features[i]);
      const std::vector<double> scores = rescore_apply(model->second, k, f);
      for (std::size_t r = 0; r < idx.size(); ++r) fused[idx[r]].box.score = scores[r];
    }
  }
  result.report = evaluate_dataset(fused, annotations.objects, annotations.categories, config.match);
  result.rescored.records = std::move(fused);
  return result;
}

CascadeResult run_cascade(const ModelBundle& bundle, const AnnotationFile& annotations,
                          const DetectionFile& detections, const ImageProvider& images) {
  return run_cascade(bundle.config, annotations, detections, bow_scorer(bundle, images),
                     bundle.rescorers, bundle.rescore_skipped);
}

json eval_json(const EvalReport& report) {
  json cats = json::array();
  for (const CategoryEval& c : report.categories) {
    cats.push_back({{"id", c.category_id},
                    {"name", c.name},
                    {"total_gt", c.total_gt},
                    {"detections", c.scores.size()},
                    {"true_positives", std::count(c.true_positive.begin(), c.true_positive.end(), true)},
                    {"ap", c.ap}});
  }
  return {{"mean_ap", report.mean_ap}, {"categories", cats}};
}

json report_json(const CascadeResult& result) {
  return {{"format", "regionlift.report"},
          {"version", 1},
          {"config", to_json(result.config)},
          {"baseline", eval_json(result.baseline)},
          {"output", eval_json(result.report)},
          {"improvement", result.report.mean_ap - result.baseline.mean_ap},
          {"warnings", result.warnings}};
}

void write_run_outputs(const CascadeResult& result, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  save_detections(result.rescored, out_dir / "detections.jsonl");
  auto write_text = [&](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error(p.string() + ": cannot write");
    out << text << '\n';
  };
  write_text(out_dir / "report.json", report_json(result).dump(2));
  write_text(out_dir / "config.json", to_json(result.config).dump(2));
  for (const CategoryEval& c : result.report.categories) {
    std::ofstream csv(out_dir / ("pr_" + c.name + ".csv"));
    if (!csv) throw std::runtime_error((out_dir / ("pr_" + c.name + ".csv")).string() + ": cannot write");
    write_pr_csv(csv, c);
  }
}

}  // namespace regionlift
