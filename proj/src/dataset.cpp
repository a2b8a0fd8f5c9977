#include "regionlift/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <json.hpp>

#include "regionlift/random.hpp"
#include "regionlift/supporting_regions.hpp"

namespace regionlift {

using nlohmann::json;

std::size_t RegionDataset::count(int category_id, int label) const {
  return static_cast<std::size_t>(std::count_if(samples.begin(), samples.end(), [&](const auto& s) {
    return s.category_id == category_id && s.label == label;
  }));
}

namespace {

bool touches_ground_truth(const Rect& box, const std::vector<BoundingBox>& truth) {
  return std::any_of(truth.begin(), truth.end(),
                     [&](const BoundingBox& g) { return intersect(box, g.rect).has_value(); });
}

}  // namespace

RegionDataset build_region_dataset(const AnnotationFile& annotations,
                                   const DetectionFile& detections, DatasetPolicy policy,
                                   std::uint64_t seed, const SupportOptions& support) {
  RegionDataset out;
  Rng rng(seed);
  for (const auto& [category, name] : annotations.categories) {
    std::vector<RegionSample> positives;
    std::vector<RegionSample> negatives;
    for (const ImageInfo& info : annotations.images) {
      for (const BoundingBox& g : annotations.objects.at(info.id)) {
        RegionSample s{info.id, category, g.category_id == category ? 1 : -1, Region(g.rect)};
        (s.label == 1 ? positives : negatives).push_back(std::move(s));
      }
    }
    if (positives.empty()) {
      throw std::invalid_argument("category " + std::to_string(category) + " ('" + name +
                                  "') has no positive regions");
    }

    if (policy == DatasetPolicy::gt_plus_false_alarms) {
      negatives.clear();
      std::map<std::string, std::vector<BoundingBox>> per_image;
      for (const Detection& d : detections.records) {
        if (d.box.category_id == category) per_image[d.image_id].push_back(d.box);
      }
      std::vector<RegionSample> candidates;
      for (const ImageInfo& info : annotations.images) {
        auto it = per_image.find(info.id);
        if (it == per_image.end()) continue;
        const RankedDetections ranked = rank_detections(it->second, info.extent());
        SupportOptions own_part = support;
        own_part.include_background = false;
        const SupportSet set = build_support_set(ranked, own_part);
        const auto& truth = annotations.objects.at(info.id);
        for (const SupportEntry& e : set.per_box) {
          const Rect& box = ranked.boxes[e.index].rect;
          if (touches_ground_truth(box, truth) || e.support.empty()) continue;
          candidates.push_back({info.id, category, -1, e.support});
        }
      }
      // Partial Fisher-Yates: the first `take` slots become the sample.
      const std::size_t take = std::min(candidates.size(), positives.size());
      for (std::size_t i = 0; i < take; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(candidates.size() - i));
        std::swap(candidates[i], candidates[j]);
      }
      candidates.resize(take);
      negatives = std::move(candidates);
    }

    out.samples.insert(out.samples.end(), std::make_move_iterator(positives.begin()),
                       std::make_move_iterator(positives.end()));
    out.samples.insert(out.samples.end(), std::make_move_iterator(negatives.begin()),
                       std::make_move_iterator(negatives.end()));
  }
  return out;
}

void save_region_dataset(const RegionDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot write");
  out << json{{"type", "header"}, {"format", "regionlift.regions"}, {"version", 1}}.dump() << '\n';
  for (const RegionSample& s : dataset.samples) {
    json rects = json::array();
    for (const Rect& r : s.region.rects()) rects.push_back({r.x1, r.y1, r.x2, r.y2});
    out << json{{"image", s.image_id}, {"category", s.category_id}, {"label", s.label},
                {"rects", rects}}.dump()
        << '\n';
  }
}

RegionDataset load_region_dataset(const std::filesystem::path& path,
                                  const AnnotationFile& manifest) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open");
  RegionDataset out;
  std::string text;
  std::size_t line = 0;
  auto fail = [&](const std::string& why) {
    throw FormatError(path.string() + ":" + std::to_string(line) + ": " + why);
  };
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(text);
      if (j.value("type", std::string()) == "header") continue;
      RegionSample s;
      s.image_id = j.at("image").get<std::string>();
      s.category_id = j.at("category").get<int>();
      s.label = j.at("label").get<int>();
      std::vector<Rect> rects;
      for (const auto& r : j.at("rects")) rects.push_back({r.at(0), r.at(1), r.at(2), r.at(3)});
      s.region = Region::from_rects(rects);
      const ImageInfo* info = manifest.find_image(s.image_id);
      if (!info) fail("unknown image '" + s.image_id + "'");
      if (!manifest.categories.contains(s.category_id)) fail("unknown category");
      if (s.label != 1 && s.label != -1) fail("label must be -1 or +1");
      if (const auto b = s.region.bounds(); b && !info->extent().contains(*b)) fail("region outside image");
      out.samples.push_back(std::move(s));
    } catch (const json::exception& e) {
      fail(e.what());
    }
  }
  return out;
}

}  // namespace regionlift
