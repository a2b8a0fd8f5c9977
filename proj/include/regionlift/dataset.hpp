#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "regionlift/config.hpp"
#include "regionlift/geometry.hpp"
#include "regionlift/io.hpp"

namespace regionlift {

/// One training region for the classifier of `category_id`. The crop is the
/// region's bounding box and the region itself is the mask.
struct RegionSample {
  std::string image_id;
  int category_id = 0;
  int label = 1;
  Region region;

  friend bool operator==(const RegionSample&, const RegionSample&) = default;
};

struct RegionDataset {
  std::vector<RegionSample> samples;

  std::size_t count(int category_id, int label) const;
  friend bool operator==(const RegionDataset&, const RegionDataset&) = default;
};

/// Region-level training sets, one per category.
///
/// gt-only: positives are the category's ground-truth boxes, negatives the
/// ground-truth boxes of every other category.
/// gt-plus-false-alarms: positives as above; negatives are a seeded sample
/// (as many as there are positives, when available) of the category's
/// detections that overlap no ground-truth box at all, each masked by the
/// part of its supporting region inside the box.
/// Throws std::invalid_argument for a category without positives.
RegionDataset build_region_dataset(const AnnotationFile& annotations,
                                   const DetectionFile& detections, DatasetPolicy policy,
                                   std::uint64_t seed, const SupportOptions& support = {});

void save_region_dataset(const RegionDataset& dataset, const std::filesystem::path& path);
RegionDataset load_region_dataset(const std::filesystem::path& path,
                                  const AnnotationFile& manifest);

}  // namespace regionlift
