#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "oracles.hpp"
#include "regionlift/bow.hpp"
#include "regionlift/simulate.hpp"

using namespace regionlift;

namespace {

// Clockwise from the top-left, bit p set when neighbour p >= centre.
int slow_code(const GrayImage& img, int x, int y) {
  const int nx[8] = {x - 1, x, x + 1, x + 1, x + 1, x, x - 1, x - 1};
  const int ny[8] = {y - 1, y - 1, y - 1, y, y + 1, y + 1, y + 1, y};
  int code = 0;
  for (int p = 0; p < 8; ++p) code += (img.at(nx[p], ny[p]) >= img.at(x, y)) << p;
  return code;
}

int transitions(int code) {
  int t = 0;
  for (int p = 0; p < 8; ++p) t += ((code >> p) & 1) != ((code >> ((p + 1) % 8)) & 1);
  return t;
}

int slow_bin(int code) {
  if (transitions(code) > 2) return 58;
  int bin = 0;
  for (int c = 0; c < code; ++c) bin += transitions(c) <= 2;
  return bin;
}

std::vector<double> slow_histogram(const GrayImage& img, bool complement = false) {
  std::vector<double> h(59, 0.0);
  const double n = (img.width - 2) * (img.height - 2);
  for (int y = 1; y + 1 < img.height; ++y)
    for (int x = 1; x + 1 < img.width; ++x) {
      const int code = slow_code(img, x, y);
      h[slow_bin(complement ? (~code & 0xff) : code)] += 1.0 / n;
    }
  return h;
}

GrayImage random_image(Rng& rng, int w, int h) {
  GrayImage img(w, h);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
  return img;
}

void check_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= tol);
}

RowMatrix to_matrix(const std::vector<std::vector<double>>& rows) {
  RowMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

}  // namespace

TEST_CASE("uniform bin table") {
  int uniform = 0;
  for (int c = 0; c < 256; ++c) {
    CHECK(uniform_bin(static_cast<std::uint8_t>(c)) == slow_bin(c));
    uniform += transitions(c) <= 2;
  }
  CHECK(uniform == 58);
}

TEST_CASE("lbp descriptor") {
  const GrayImage flat(8, 8, 77);
  const Descriptor d = lbp_descriptor(flat);
  CHECK(d.values[uniform_bin(0xff)] == 1.0);
  CHECK(std::accumulate(d.values.begin(), d.values.end(), 0.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(lbp_descriptor(GrayImage(2, 5)), std::invalid_argument);

  GrayImage step(10, 10);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) step.at(x, y) = x < 5 ? 20 : 220;
  check_close(lbp_descriptor(step).values, slow_histogram(step), 1e-15);

  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const GrayImage img = random_image(rng, rng.range(3, 20), rng.range(3, 20));
    check_close(lbp_descriptor(img).values, slow_histogram(img), 1e-15);
  }

  // all-distinct pixels: inverting the patch complements every code
  std::vector<int> values(256);
  std::iota(values.begin(), values.end(), 0);
  for (std::size_t i = 255; i > 0; --i) std::swap(values[i], values[rng.below(i + 1)]);
  GrayImage distinct(12, 12), inverted(12, 12);
  for (std::size_t i = 0; i < distinct.pixels.size(); ++i) {
    distinct.pixels[i] = static_cast<std::uint8_t>(values[i]);
    inverted.pixels[i] = static_cast<std::uint8_t>(255 - values[i]);
  }
  check_close(lbp_descriptor(inverted).values, slow_histogram(distinct, true), 1e-15);
}

TEST_CASE("patch histogram equals descriptor of the cropped patch") {
  Rng rng(8);
  const GrayImage img = random_image(rng, 40, 30);
  const auto codes = lbp_code_map(img);
  for (int t = 0; t < 30; ++t) {
    const int size = rng.range(3, 16);
    const int x0 = rng.range(0, 40 - size);
    const int y0 = rng.range(0, 30 - size);
    check_close(patch_histogram(codes, img.width, x0, y0, size),
                lbp_descriptor(crop(img, {x0, y0, x0 + size, y0 + size})).values, 0.0);
  }
}

TEST_CASE("dense sampling grid") {
  const GrayImage img(64, 64, 10);
  SamplingConfig cfg;
  cfg.patch_sizes = {16};
  cfg.stride = 8;
  CHECK(dense_sample(img, Bitmask(64, 64, true), cfg).size() == 49);
  CHECK(dense_sample(img, Bitmask(64, 64, false), cfg).empty());
  Bitmask left(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 32; ++x) left.set(x, y, true);
  const auto half = dense_sample(img, left, cfg);
  CHECK(half.size() == 21);
  for (const Descriptor& d : half) CHECK(d.x < 32);
  CHECK_THROWS(dense_sample(img, Bitmask(10, 10, true), cfg));
  SamplingConfig def;
  CHECK(def.stride_for(12) == 6);
  CHECK(def.stride_for(16) == 8);
}

TEST_CASE("kmeans") {
  SUBCASE("one centre per distinct point") {
    const RowMatrix pts = to_matrix({{0, 0}, {5, 1}, {-3, 7}, {2, 2}});
    const auto r = kmeans_train(pts, {4, 1, 50, 1e-4});
    CHECK(r.objective.back() == 0.0);
    for (int i = 0; i < 4; ++i) {
      const int c = nearest_center(r.codebook, pts.row(i).data());
      CHECK((r.codebook.centers.row(c) - pts.row(i)).norm() == 0.0);
    }
  }
  SUBCASE("two blobs") {
    Rng rng(4);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 100; ++i) rows.push_back({rng.uniform(0, 1), rng.uniform(0, 1)});
    for (int i = 0; i < 100; ++i) rows.push_back({rng.uniform(10, 11), rng.uniform(10, 11)});
    const auto r = kmeans_train(to_matrix(rows), {2, 9, 50, 1e-6});
    std::vector<bool> seen(2, false);
    for (int c = 0; c < 2; ++c) {
      const double x = r.codebook.centers(c, 0), y = r.codebook.centers(c, 1);
      const bool low = x >= 0 && x <= 1 && y >= 0 && y <= 1;
      const bool high = x >= 10 && x <= 11 && y >= 10 && y <= 11;
      CHECK((low || high));
      seen[high] = true;
    }
    CHECK(seen[0]);
    CHECK(seen[1]);
    for (std::size_t i = 1; i < r.objective.size(); ++i) CHECK(r.objective[i] <= r.objective[i - 1]);
  }
  SUBCASE("determinism and errors") {
    Rng rng(6);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 300; ++i) rows.push_back({rng.normal(), rng.normal(), rng.normal()});
    const RowMatrix m = to_matrix(rows);
    const auto a = kmeans_train(m, {8, 77, 30, 1e-4});
    const auto b = kmeans_train(m, {8, 77, 30, 1e-4});
    CHECK(a.codebook.centers == b.codebook.centers);
    CHECK_THROWS_AS(kmeans_train(m.topRows(5), {8, 1, 30, 1e-4}), std::invalid_argument);
  }
}

TEST_CASE("llc") {
  Codebook cb;
  cb.centers = to_matrix({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}, {2, 0, 1}});
  SUBCASE("exact centre with lambda 0 gives an indicator") {
    const std::vector<double> x{0, 1, 0};
    const SparseCode c = llc_encode(x, cb, {4, 0.0});
    const auto dense = c.dense(cb.size());
    for (std::size_t k = 0; k < dense.size(); ++k) CHECK(dense[k] == doctest::Approx(k == 2 ? 1.0 : 0.0).epsilon(1e-12));
  }
  SUBCASE("single neighbour") {
    const std::vector<double> x{0.9, 0.1, 0.2};
    const SparseCode c = llc_encode(x, cb, {1, 1e-4});
    CHECK(c.index == std::vector<std::uint32_t>{1});
    CHECK(c.value == std::vector<double>{1.0});
  }
  SUBCASE("singular local system") {
    Codebook flat;
    flat.centers = to_matrix({{0, 0}, {1, 0}, {0, 1}, {1, 1}, {2, 2}});
    const std::vector<double> x{0.3, 0.4};
    CHECK_THROWS_AS(llc_encode(x, flat, {5, 0.0}), std::domain_error);
    CHECK_NOTHROW(llc_encode(x, flat, {5, 1e-4}));
  }
  SUBCASE("matches the constrained least-squares oracle") {
    Rng rng(12);
    for (int t = 0; t < 200; ++t) {
      const int k = rng.range(2, 16);
      const int d = rng.range(2, 10);
      Codebook book;
      book.centers = RowMatrix(k, d);
      for (int i = 0; i < k * d; ++i) book.centers.data()[i] = rng.normal();
      std::vector<double> x(d);
      for (double& v : x) v = rng.normal();
      const LlcParams params{rng.range(1, std::min(k, 6)), rng.uniform(1e-4, 1e-1)};
      const SparseCode code = llc_encode(x, book, params);
      std::vector<std::vector<double>> basis;
      for (auto i : code.index) {
        basis.emplace_back(book.centers.row(i).data(), book.centers.row(i).data() + d);
      }
      const auto expect = oracle::constrained_ls(x, basis, params.lambda);
      check_close(code.value, expect, 1e-8);
      CHECK(std::accumulate(code.value.begin(), code.value.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("spm pooling") {
  SparseCode a{{0, 2}, {0.7, -0.3}};
  SparseCode b{{1, 2}, {0.4, 0.6}};
  PyramidConfig one{{{1, 1}}};
  CHECK(spm_pool({{a, 1, 1}}, 10, 10, 3, one) == std::vector<double>{0.7, 0.0, 0.0});

  PyramidConfig halves{{{1, 2}}};
  const auto f = spm_pool({{a, 2, 5}, {b, 7, 5}}, 10, 10, 3, halves);
  CHECK(f == std::vector<double>{0.7, 0.0, 0.0, 0.0, 0.4, 0.6});

  // brute-force pooling over random codes and the default pyramid
  Rng rng(21);
  const PyramidConfig pyr;
  CHECK(pyr.cells() == 9);
  CHECK(feature_dimension(2, 10240, pyr) == 184320);
  const int w = 37, h = 23, k = 5;
  std::vector<PositionedCode> codes;
  for (int i = 0; i < 40; ++i) {
    SparseCode c;
    for (int j = 0; j < 3; ++j) {
      c.index.push_back(static_cast<std::uint32_t>(rng.below(k)));
      c.value.push_back(rng.normal());
    }
    codes.push_back({c, rng.range(0, w - 1), rng.range(0, h - 1)});
  }
  std::vector<double> expect;
  for (const PyramidLevel& lv : pyr.levels) {
    for (int r = 0; r < lv.rows; ++r)
      for (int c = 0; c < lv.cols; ++c) {
        std::vector<double> cell(k, 0.0);
        for (const auto& pc : codes) {
          const bool in = pc.y * lv.rows / h == r && pc.x * lv.cols / w == c;
          for (std::size_t j = 0; in && j < pc.code.index.size(); ++j)
            cell[pc.code.index[j]] = std::max(cell[pc.code.index[j]], pc.code.value[j]);
        }
        expect.insert(expect.end(), cell.begin(), cell.end());
      }
  }
  CHECK(spm_pool(codes, w, h, k, pyr) == expect);
  CHECK_THROWS(spm_pool({{a, w, 0}}, w, h, k, pyr));
}

TEST_CASE("region classifier") {
  Rng rng(31);
  BowEncoding enc;
  enc.codebook.centers = RowMatrix(8, kLbpBins);
  for (int i = 0; i < enc.codebook.centers.size(); ++i) enc.codebook.centers.data()[i] = rng.uniform();
  const GrayImage img = random_image(rng, 32, 32);
  const Bitmask full(32, 32, true);

  LinearScorer zero{std::vector<double>(enc.feature_dim(), 0.0), -0.25};
  CHECK(classify_region(img, full, enc, zero) == -0.25);
  LinearScorer ones{std::vector<double>(enc.feature_dim(), 1.0), 0.5};
  CHECK(classify_region(img, Bitmask(32, 32), enc, ones) == 0.5);
  LinearScorer wrong{std::vector<double>(3, 1.0), 0.0};
  CHECK_THROWS_AS(classify_region(img, full, enc, wrong), std::invalid_argument);

  // the cached extractor agrees with the one-shot path
  FeatureExtractor fx(img, enc);
  const Region r = Region::from_rects(std::vector<Rect>{{2, 3, 20, 15}, {10, 15, 30, 30}});
  const Rect frame = *r.bounds();
  const auto direct = region_feature(crop(img, frame),
                                     rasterize(r.translated(-frame.x1, -frame.y1), {frame.width(), frame.height()}), enc);
  CHECK(fx.region_feature(r) == direct);
  CHECK(fx.region_feature(r) == direct);
}

TEST_CASE("trained toy classifier separates textures") {
  SceneParams p;
  p.images = 40;
  p.categories = 2;
  p.width = p.height = 64;
  p.min_size = 20;
  p.max_size = 30;
  p.max_objects = 2;
  const SimulatedData data = simulate(5, p);

  std::vector<std::vector<double>> descriptors;
  for (const auto& info : data.annotations.images) {
    for (const auto& g : data.annotations.objects.at(info.id)) {
      const GrayImage c = crop(data.images.at(info.id), g.rect);
      for (const auto& d : dense_sample(c, Bitmask(c.width, c.height, true), SamplingConfig{}))
        descriptors.push_back(d.values);
    }
  }
  BowEncoding enc;
  enc.codebook = kmeans_train(to_matrix(descriptors), {16, 3, 20, 1e-4}).codebook;

  std::vector<std::vector<double>> feats;
  std::vector<int> labels;
  for (const auto& info : data.annotations.images) {
    FeatureExtractor fx(data.images.at(info.id), enc);
    for (const auto& g : data.annotations.objects.at(info.id)) {
      feats.push_back(fx.region_feature(Region(g.rect)));
      labels.push_back(g.category_id == 0 ? 1 : -1);
    }
  }
  const std::size_t train = feats.size() / 2;
  const RowMatrix x = to_matrix(std::vector<std::vector<double>>(feats.begin(), feats.begin() + train));
  const LinearScorer scorer =
      train_linear_classifier(x, std::span<const int>(labels.data(), train), SmoParams{});
  int correct = 0;
  for (std::size_t i = train; i < feats.size(); ++i) correct += (scorer.score(feats[i]) > 0) == (labels[i] == 1);
  CHECK(correct >= static_cast<int>(0.9 * static_cast<double>(feats.size() - train)));
}
