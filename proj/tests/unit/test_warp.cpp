#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "textcen/forces.hpp"
#include "textcen/warp.hpp"

using namespace textcen;

namespace {

AttentionMap point_mass(int H, int W, int r, int c) {
  oracle::Grid g(H, std::vector<double>(W, 0.0));
  g[r][c] = 1.0;
  return test::to_map(g);
}

double half_height(const BoundingBox& b) { return (b.bottom - b.top) / 2.0; }

}  // namespace

TEST_CASE("translate_map examples") {
  std::mt19937_64 rng(1);
  const auto m = test::to_map(test::random_grid(rng, 10, 12));
  const AttentionMap same = translate_map(m, {0, 0});
  CHECK(std::equal(same.values().begin(), same.values().end(), m.values().begin()));

  const AttentionMap moved = translate_map(point_mass(8, 8, 2, 2), {1, 3});
  CHECK(moved(3, 5) == 1.0);
  CHECK(moved.total_mass() == 1.0);

  const auto blob = test::to_map(oracle::gaussian(32, 32, 2, 2, 3));
  const AttentionMap clipped = translate_map(blob, {-2, -2});
  CHECK(clipped.total_mass() < blob.total_mass());
}

TEST_CASE("translate_map matches a brute-force integer shift") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> s(-6, 6);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = test::random_grid(rng, 9, 11);
    const int dr = s(rng), dc = s(rng);
    const AttentionMap out = translate_map(test::to_map(g), {double(dr), double(dc)});
    for (int h = 0; h < 9; ++h)
      for (int w = 0; w < 11; ++w) {
        const int sh = h - dr, sw = w - dc;
        const double want = (sh >= 0 && sh < 9 && sw >= 0 && sw < 11) ? g[sh][sw] : 0.0;
        CHECK(out(h, w) == want);
      }
  }
}

TEST_CASE("compute_scale examples") {
  CHECK(compute_scale({0, 0, 70, 60}, 64, 64) == ScaleFactors{0.9, 1.0});
  CHECK(compute_scale({3, 3, 40, 50}, 64, 64) == ScaleFactors{1.0, 1.0});
  CHECK(compute_scale({0, 0, 126, 126}, 64, 64) == ScaleFactors{0.5, 0.5});
  CHECK_THROWS_AS(compute_scale({0, 0, 0, 10}, 64, 64), Error);
  CHECK_THROWS_AS(compute_scale({0, 0, 10, -1}, 64, 64), Error);
}

TEST_CASE("build_transform examples") {
  const AffineTransform id = build_transform({0, 0}, {1, 1}, {7, 3});
  CHECK(id.apply({4.5, -2}) == Vec2{4.5, -2});

  const AffineTransform tr = build_transform({1, 2}, {1, 1}, {5, 5});
  CHECK(tr.apply({0, 0}) == Vec2{1, 2});
  CHECK(tr.is_translation());

  const AffineTransform half = build_transform({0, 0}, {0.5, 0.5}, {0, 0});
  CHECK(half.apply({10, 6}) == Vec2{5, 3});
  const Vec2 back = half.source_of({5, 3});
  CHECK(back.row == doctest::Approx(10));
  CHECK(back.col == doctest::Approx(6));

  // Raw matrix entries follow (S, d - o).
  const Matrix3 raw = build_transform({1, 2}, {0.5, 0.8}, {3, 4}).matrix();
  CHECK(raw[0][0] == 0.5);
  CHECK(raw[1][1] == 0.8);
  CHECK(raw[0][2] == -2.0);
  CHECK(raw[1][2] == -2.0);
  CHECK(raw[2][0] == 0.0);
  CHECK(raw[2][1] == 0.0);
  CHECK(raw[2][2] == 1.0);
}

TEST_CASE("apply_affine examples") {
  std::mt19937_64 rng(3);
  const auto m = test::to_map(test::random_grid(rng, 16, 16));
  const AttentionMap id = apply_affine(m, AffineTransform::identity());
  for (int h = 0; h < 16; ++h)
    for (int w = 0; w < 16; ++w) CHECK(std::abs(id(h, w) - m(h, w)) <= 1e-9);

  const AttentionMap a = apply_affine(m, AffineTransform::translation({2, -3}));
  const AttentionMap b = translate_map(m, {2, -3});
  CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));

  // Halving about the blob centre halves its thresholded extent.
  const auto blob = test::to_map(oracle::gaussian(64, 64, 32, 32, 6));
  const BoundingBox before = bounding_box(blob, 0.3);
  const AttentionMap shrunk = apply_affine(blob, build_transform({0, 0}, {0.5, 0.5}, {32, 32}));
  const BoundingBox after = bounding_box(shrunk, 0.3);
  CHECK(std::abs(half_height(after) - 0.5 * half_height(before)) <= 1.0);
  CHECK(std::abs((after.right - after.left) / 2.0 - 0.5 * (before.right - before.left) / 2.0) <= 1.0);

  CHECK_THROWS_AS(apply_affine(m, build_transform({0, 0}, {0.0, 1.0}, {0, 0})), Error);
}

TEST_CASE("warp_step examples") {
  GuidanceParams p;
  const auto centre = test::to_map(oracle::gaussian(64, 64, 32, 32, 4));
  const WarpOutcome small = warp_step_detailed(centre, {1.5, -2.0}, p);
  CHECK_FALSE(small.scaled);
  const Vec2 c0 = centroid(centre), c1 = centroid(small.map);
  CHECK(std::abs(c1.row - c0.row - 1.5) <= 0.5);
  CHECK(std::abs(c1.col - c0.col + 2.0) <= 0.5);

  const AttentionMap same = warp_step(centre, {0, 0}, p);
  CHECK(std::equal(same.values().begin(), same.values().end(), centre.values().begin()));

  // Right-edge blob pushed right is scaled so its box stays in the canvas.
  const auto edge = test::to_map(oracle::gaussian(64, 64, 32, 58, 5));
  const WarpOutcome pushed = warp_step_detailed(edge, {0, 8}, p);
  CHECK(pushed.scaled);
  const auto box = oracle::threshold_box(test::to_grid(pushed.map), p.bbox_mass);
  CHECK(box.right <= 63);
  CHECK(box.left >= 0);
  CHECK(pushed.box_after.inside_canvas(64, 64, 1e-9));
  for (double v : pushed.map.values()) CHECK(v >= 0.0);
}

TEST_CASE("warp_step keeps the box inside the canvas on random blobs") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> pos(0.0, 31.0), sig(0.8, 5.0), dir(-1.0, 1.0);
  GuidanceParams p;
  const double cap = step_scale(32, 32, p.max_step);
  for (int trial = 0; trial < 200; ++trial) {
    const auto blob = test::to_map(oracle::gaussian(32, 32, pos(rng), pos(rng), sig(rng)));
    Vec2 d{dir(rng), dir(rng)};
    d = (cap * std::abs(dir(rng)) / std::max(d.norm(), 1e-12)) * d;
    const AttentionMap out = warp_step(blob, d, p);
    const auto box = oracle::threshold_box(test::to_grid(out), p.bbox_mass);
    CHECK(box.top >= 0);
    CHECK(box.left >= 0);
    CHECK(box.bottom <= 31);
    CHECK(box.right <= 31);
    for (double v : out.values()) CHECK(v >= 0.0);
  }
}

TEST_CASE("translation-only warp moves the centroid by d") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> c(24.0, 40.0), d(-3.0, 3.0), s(1.5, 3.0);
  GuidanceParams p;
  for (int trial = 0; trial < 100; ++trial) {
    const double sigma = s(rng);
    const auto blob = test::to_map(oracle::gaussian(64, 64, c(rng), c(rng), sigma));
    const Vec2 dv{d(rng), d(rng)};
    const WarpOutcome w = warp_step_detailed(blob, dv, p);
    REQUIRE_FALSE(w.scaled);
    const Vec2 a = centroid(blob), b = centroid(w.map);
    CHECK((b - (a + dv)).norm() <= 0.5);
  }
}
