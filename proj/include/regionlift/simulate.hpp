#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "regionlift/image.hpp"
#include "regionlift/io.hpp"

namespace regionlift {

/// Synthetic scene and detector parameters.
struct SceneParams {
  int images = 200;
  int width = 128;
  int height = 128;
  int categories = 3;
  int min_objects = 1;
  int max_objects = 3;
  int min_size = 28;
  int max_size = 48;
  /// Probability that a ground-truth object gets no detection.
  double miss_rate = 0.0;
  /// Expected false alarms per ground-truth object.
  double fp_rate = 0.5;
  /// Standard deviation of the Gaussian added to every detection score.
  double score_noise = 0.3;
  double tp_score = 0.5;
  double fp_score = 0.0;
  /// Fraction of false alarms placed on an object of another category.
  double confusion_rate = 0.5;
  double pixel_noise = 6.0;
  std::string id_prefix = "img";
};

struct SimulatedData {
  AnnotationFile annotations;
  DetectionFile detections;
  std::map<std::string, GrayImage> images;
};

/// Textured scenes (each category has its own texture, the background is a
/// smooth noisy field) with a noisy detector run over them. Deterministic
/// per seed. Throws std::invalid_argument for inconsistent parameters.
SimulatedData simulate(std::uint64_t seed, const SceneParams& params);

/// Writes annotations.jsonl, detections.jsonl and images/<id>.pgm.
void write_simulation(const SimulatedData& data, const std::filesystem::path& out_dir);

/// Pixel value of category texture `category` at (x, y), before noise.
int texture_value(int category, int x, int y);

}  // namespace regionlift
