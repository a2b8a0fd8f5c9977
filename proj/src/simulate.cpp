#include "regionlift/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "regionlift/random.hpp"

namespace regionlift {

int texture_value(int category, int x, int y) {
  const int period = 8 + 2 * (category / 4);
  const int half = period / 2;
  bool on = false;
  switch (category % 4) {
    case 0: on = (y % period) < half; break;                          // horizontal stripes
    case 1: on = (x % period) < half; break;                          // vertical stripes
    case 2: on = ((x / half) + (y / half)) % 2 == 0; break;           // checkerboard
    default: on = ((x + y) % period) < half; break;                   // diagonal stripes
  }
  return on ? 200 : 60;
}

namespace {

int background_value(int x, int y) {
  return static_cast<int>(128.0 + 25.0 * std::sin(x / 17.0) * std::cos(y / 23.0));
}

std::uint8_t clamp_pixel(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

Rect random_box(Rng& rng, const SceneParams& p) {
  const int w = rng.range(p.min_size, p.max_size);
  const int h = rng.range(p.min_size, p.max_size);
  const int x = rng.range(0, p.width - w);
  const int y = rng.range(0, p.height - h);
  return {x, y, x + w, y + h};
}

Rect jitter(const Rect& box, Rng& rng, const SceneParams& p) {
  const int jx = std::max(1, box.width() / 10);
  const int jy = std::max(1, box.height() / 10);
  Rect r{box.x1 + rng.range(-jx, jx), box.y1 + rng.range(-jy, jy),
         box.x2 + rng.range(-jx, jx), box.y2 + rng.range(-jy, jy)};
  r.x1 = std::clamp(r.x1, 0, p.width - 1);
  r.y1 = std::clamp(r.y1, 0, p.height - 1);
  r.x2 = std::clamp(r.x2, r.x1 + 1, p.width);
  r.y2 = std::clamp(r.y2, r.y1 + 1, p.height);
  return r;
}

bool overlaps_any(const Rect& r, const std::vector<BoundingBox>& boxes) {
  return std::any_of(boxes.begin(), boxes.end(),
                     [&](const BoundingBox& b) { return intersect(r, b.rect).has_value(); });
}

void check(const SceneParams& p) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("scene params: ") + what);
  };
  require(p.images >= 1, "images must be >= 1");
  require(p.categories >= 1, "categories must be >= 1");
  require(p.min_size >= 8 && p.min_size <= p.max_size, "need 8 <= min_size <= max_size");
  require(p.max_size <= p.width && p.max_size <= p.height, "objects must fit in the image");
  require(p.min_objects >= 0 && p.min_objects <= p.max_objects, "bad object count range");
  require(p.miss_rate >= 0.0 && p.miss_rate <= 1.0, "miss_rate must lie in [0, 1]");
  require(p.fp_rate >= 0.0 && p.fp_rate <= 1.0, "fp_rate must lie in [0, 1]");
  require(p.confusion_rate >= 0.0 && p.confusion_rate <= 1.0, "confusion_rate must lie in [0, 1]");
  require(p.score_noise >= 0.0 && p.pixel_noise >= 0.0, "noise levels must be >= 0");
}

}  // namespace

SimulatedData simulate(std::uint64_t seed, const SceneParams& p) {
  check(p);
  Rng rng(seed);
  SimulatedData data;
  for (int c = 0; c < p.categories; ++c) {
    static const char* kNames[] = {"hstripes", "vstripes", "checker", "diagonal"};
    data.annotations.categories[c] =
        std::string(kNames[c % 4]) + (c >= 4 ? std::to_string(c / 4) : std::string());
  }

  for (int n = 0; n < p.images; ++n) {
    char id_buf[64];
    std::snprintf(id_buf, sizeof id_buf, "%s-%04d", p.id_prefix.c_str(), n);
    const std::string id = id_buf;
    data.annotations.images.push_back({id, "images/" + id + ".pgm", p.width, p.height});
    auto& truth = data.annotations.objects[id];

    const int count = rng.range(p.min_objects, p.max_objects);
    for (int o = 0; o < count; ++o) {
      for (int attempt = 0; attempt < 100; ++attempt) {
        const Rect r = random_box(rng, p);
        if (overlaps_any(r, truth)) continue;
        truth.push_back({r, 0.0, rng.range(0, p.categories - 1)});
        break;
      }
    }

    GrayImage img(p.width, p.height);
    for (int y = 0; y < p.height; ++y) {
      for (int x = 0; x < p.width; ++x) {
        int base = background_value(x, y);
        for (const BoundingBox& b : truth) {
          if (b.rect.contains(x, y)) base = texture_value(b.category_id, x, y);
        }
        img.at(x, y) = clamp_pixel(base + p.pixel_noise * rng.normal());
      }
    }
    data.images.emplace(id, std::move(img));

    auto emit = [&](const Rect& r, int category, double base_score) {
      data.detections.records.push_back(
          {id, {r, base_score + p.score_noise * rng.normal(), category}});
    };
    for (const BoundingBox& g : truth) {
      if (!rng.bernoulli(p.miss_rate)) {
        Rect r = g.rect;
        for (int attempt = 0; attempt < 20; ++attempt) {
          const Rect candidate = jitter(g.rect, rng, p);
          if (iou(candidate, g.rect) >= 0.6) {
            r = candidate;
            break;
          }
        }
        emit(r, g.category_id, p.tp_score);
      }
    }
    for (std::size_t g = 0; g < truth.size(); ++g) {
      if (!rng.bernoulli(p.fp_rate)) continue;
      const int category = rng.range(0, p.categories - 1);
      std::vector<const BoundingBox*> others;
      for (const BoundingBox& b : truth) {
        if (b.category_id != category) others.push_back(&b);
      }
      if (!others.empty() && rng.bernoulli(p.confusion_rate)) {
        const BoundingBox& target = *others[rng.below(others.size())];
        const Rect r = jitter(target.rect, rng, p);
        const bool hits_same = std::any_of(truth.begin(), truth.end(), [&](const BoundingBox& b) {
          return b.category_id == category && iou(r, b.rect) >= 0.5;
        });
        if (!hits_same) {
          emit(r, category, p.fp_score);
          continue;
        }
      }
      for (int attempt = 0; attempt < 50; ++attempt) {
        const Rect r = random_box(rng, p);
        if (overlaps_any(r, truth)) continue;
        emit(r, category, p.fp_score);
        break;
      }
    }
  }
  return data;
}

void write_simulation(const SimulatedData& data, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir / "images");
  save_annotations(data.annotations, out_dir / "annotations.jsonl");
  save_detections(data.detections, out_dir / "detections.jsonl");
  for (const auto& [id, img] : data.images) save_pgm(img, out_dir / "images" / (id + ".pgm"));
}

}  // namespace regionlift
