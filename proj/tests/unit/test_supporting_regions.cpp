#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "regionlift/supporting_regions.hpp"

using namespace regionlift;

namespace {

RankedDetections ranked(std::vector<std::pair<Rect, double>> boxes, ImageExtent e) {
  std::vector<BoundingBox> b;
  for (auto& [r, s] : boxes) b.push_back({r, s, 0});
  return rank_detections(std::move(b), e);
}

}  // namespace

TEST_CASE("ranking is a stable descending sort") {
  CHECK(rank_detections({}, {10, 10}).size() == 0);
  const auto r = ranked({{{0, 0, 2, 2}, 0.2}, {{1, 1, 3, 3}, 0.9}}, {10, 10});
  CHECK(r.source_index == std::vector<std::size_t>{1, 0});
  const auto tie = ranked({{{0, 0, 2, 2}, 0.5}, {{1, 1, 3, 3}, 0.5}, {{2, 2, 4, 4}, 0.5}}, {10, 10});
  CHECK(tie.source_index == std::vector<std::size_t>{0, 1, 2});
  CHECK_THROWS(ranked({{{0, 0, 11, 2}, 0.5}}, {10, 10}));
}

TEST_CASE("background region") {
  CHECK(background_region(ranked({}, {20, 20})) == Region::full({20, 20}));
  CHECK(background_region(ranked({{{0, 0, 20, 20}, 1.0}}, {20, 20})).empty());
  const auto d = ranked({{{0, 0, 10, 10}, 1.0}, {{5, 5, 15, 15}, 0.5}}, {20, 20});
  CHECK(background_region(d).area() == 225);
}

TEST_CASE("supporting region examples") {
  const auto one = ranked({{{3, 3, 8, 8}, 1.0}}, {20, 20});
  CHECK(supporting_region(one, 0) == Region::full({20, 20}));
  SupportOptions lower;
  lower.orientation = Orientation::lower;
  CHECK(supporting_region(one, 0, lower) == supporting_region(one, 0));

  const auto d = ranked({{{0, 0, 10, 10}, 0.9}, {{5, 0, 15, 10}, 0.1}}, {20, 20});
  const Region s1 = supporting_region(d, 1);
  const Region bg = background_region(d);
  CHECK(bg.area() == 250);
  CHECK(s1.area() - bg.area() == 50);
  CHECK(intersect(s1, Rect{0, 0, 10, 10}).empty());
  // the literal orientation lets box 1 keep the overlap and carves box 0 instead
  CHECK(supporting_region(d, 1, lower).area() == 250 + 100);
  CHECK(supporting_region(d, 0, lower).area() == 250 + 50);
  CHECK_THROWS_AS(supporting_region(d, 2), std::out_of_range);

  SupportOptions no_bg;
  no_bg.include_background = false;
  CHECK(supporting_region(d, 1, no_bg) == Region(Rect{10, 0, 15, 10}));
}

TEST_CASE("local background") {
  const auto single = ranked({{{10, 10, 20, 20}, 1.0}}, {100, 100});
  CHECK(local_background(single, 0, 0.0).empty());
  const Region ring = local_background(single, 0, 0.5);
  CHECK(ring.area() == 300);
  CHECK(ring.bounds() == Rect{5, 5, 25, 25});

  const auto touching = ranked({{{10, 10, 20, 20}, 1.0}, {{20, 10, 30, 20}, 0.5}}, {100, 100});
  const Region r = local_background(touching, 0, 0.5);
  CHECK(intersect(r, Rect{20, 10, 30, 20}).empty());
  CHECK(r.area() == 400 - 100 - 50);
}

TEST_CASE("support set on edge cases") {
  const SupportSet none = build_support_set(ranked({}, {7, 5}));
  CHECK(none.background == Region::full({7, 5}));
  CHECK(none.per_box.empty());
  const SupportSet one = build_support_set(ranked({{{10, 10, 20, 20}, 1.0}}, {100, 100}));
  REQUIRE(one.per_box.size() == 1);
  CHECK(one.per_box[0].support == Region::full({100, 100}));
  CHECK(one.per_box[0].local_background.area() == 300);
}

TEST_CASE("random scenes match the pixel oracle") {
  Rng rng(99);
  for (int scene = 0; scene < 200; ++scene) {
    const int w = rng.range(1, 80);
    const int h = rng.range(1, 80);
    const int n = rng.range(0, 8);
    std::vector<std::pair<Rect, double>> in;
    for (int i = 0; i < n; ++i) in.push_back({oracle::random_rect(rng, w, h), rng.uniform()});
    const auto d = ranked(in, {w, h});
    std::vector<Rect> boxes;
    for (const auto& b : d.boxes) boxes.push_back(b.rect);
    const double margin = rng.uniform(0.0, 1.0);

    for (bool higher : {true, false}) {
      for (bool with_bg : {true, false}) {
        SupportOptions opt{higher ? Orientation::higher : Orientation::lower, with_bg, margin};
        const SupportSet set = build_support_set(d, opt);
        CHECK(oracle::paint_region(set.background, w, h) == oracle::background(boxes, w, h));
        for (const SupportEntry& e : set.per_box) {
          CHECK(oracle::paint_region(e.support, w, h) ==
                oracle::support(boxes, e.index, higher, with_bg, w, h));
          CHECK(e.support == supporting_region(d, e.index, opt));
          CHECK(oracle::paint_region(e.local_background, w, h) ==
                oracle::local_background(boxes, e.index, margin, w, h));
        }
      }
    }
  }
}

TEST_CASE("score_supports applies the scorer in order") {
  const auto d = ranked({{{0, 0, 4, 4}, 0.9}, {{2, 2, 6, 6}, 0.1}}, {8, 8});
  const auto scores = score_supports(build_support_set(d),
                                     [](const Region& r) { return static_cast<double>(r.area()); });
  CHECK(scores == std::vector<double>{64.0 - 12.0, 64.0 - 16.0});
}
