#include "oracles.hpp"

#include "multistitch/features.hpp"

#include <gtest/gtest.h>

#include <random>

namespace ms = multistitch;

namespace {

ms::Image checkerboard(int size, int cell) {
  ms::Image img(size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) img(x, y) = ((x / cell + y / cell) % 2) ? 200.0f : 40.0f;
  return img;
}

ms::Image random_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 255.0f);
  ms::Image img(w, h);
  for (float& v : img.pixels()) v = u(rng);
  return img;
}

}  // namespace

TEST(Harris, ConstantImageHasNoFeatures) {
  const ms::Image img(80, 80, 128.0f);
  ms::HarrisParams p;
  EXPECT_TRUE(ms::detect_features(img, p).points.empty());
}

TEST(Harris, ResponseMatchesDirectConvolution) {
  const auto img = random_image(24, 20, 3);
  const auto fast = ms::harris_response(img, 1.5, 0.04);
  const auto slow = ms::testing::harris_oracle(img, 1.5, 0.04);
  double scale = 0.0;
  for (float v : slow.pixels()) scale = std::max(scale, static_cast<double>(std::abs(v)));
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) EXPECT_NEAR(fast(x, y), slow(x, y), 1e-5 * scale);
}

TEST(Harris, SinglePixelFoundNearby) {
  ms::Image img(64, 64, 0.0f);
  img(30, 27) = 255.0f;
  const auto slow = ms::testing::harris_oracle(img, 1.5, 0.04);
  int bx = 0, by = 0;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      if (slow(x, y) > slow(bx, by)) bx = x, by = y;

  ms::HarrisParams p;
  const auto f = ms::detect_features(img, p);
  ASSERT_GE(f.points.size(), 1u);
  EXPECT_EQ(f.points[0], ms::Pixel(bx, by));
  EXPECT_LE(std::abs(f.points[0].x() - 30), 1);
  EXPECT_LE(std::abs(f.points[0].y() - 27), 1);
}

TEST(Harris, CheckerboardCornersCappedAtMaxCount) {
  const auto img = checkerboard(128, 16);
  ms::HarrisParams p;
  p.max_count = 5;
  const auto f = ms::detect_features(img, p);
  ASSERT_EQ(f.points.size(), 5u);
  for (const auto& q : f.points) {
    // Corners sit between pixels 16k-1 and 16k.
    const int mx = ((q.x() % 16) + 16) % 16;
    const int my = ((q.y() % 16) + 16) % 16;
    EXPECT_TRUE(mx == 0 || mx == 15) << q.transpose();
    EXPECT_TRUE(my == 0 || my == 15) << q.transpose();
  }
}

TEST(Harris, SelectionInvariants) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto img = random_image(120, 90, seed);
    ms::HarrisParams p;
    p.max_count = 40;
    p.min_distance = 7.0;
    p.window_radius = 9;
    const ms::Rect roi{20, 10, 70, 60};
    const auto f = ms::detect_features(img, p, roi);
    EXPECT_LE(f.points.size(), 40u);
    EXPECT_EQ(f.window_radius, 9);
    const auto response = ms::harris_response(img, p.sigma, p.k);
    for (std::size_t a = 0; a < f.points.size(); ++a) {
      const auto& q = f.points[a];
      EXPECT_TRUE(roi.contains(q.x(), q.y()));
      EXPECT_GE(q.x(), 9);
      EXPECT_GE(q.y(), 9);
      EXPECT_LT(q.x(), img.width() - 9);
      EXPECT_LT(q.y(), img.height() - 9);
      if (a > 0) {
        EXPECT_GE(response(f.points[a - 1].x(), f.points[a - 1].y()), response(q.x(), q.y()));
      }
      for (std::size_t b = a + 1; b < f.points.size(); ++b)
        EXPECT_GE((f.points[b] - q).cast<double>().norm(), 7.0);
    }
    const auto again = ms::detect_features(img, p, roi);
    EXPECT_EQ(again.points, f.points);
  }
}

TEST(Harris, CacheMatchesDirectDetection) {
  const auto img = random_image(100, 100, 9);
  ms::HarrisParams p;
  ms::FeatureCache cache(p);
  const ms::Rect roi{10, 10, 50, 60};
  EXPECT_EQ(cache.features(3, img, roi).points, ms::detect_features(img, p, roi).points);
  EXPECT_EQ(cache.features(3, img, std::nullopt).points, ms::detect_features(img, p).points);
}

TEST(Rect, IntersectAndShrink) {
  const ms::Rect a{0, 0, 10, 10};
  EXPECT_EQ(a.intersect({5, 6, 10, 10}), (ms::Rect{5, 6, 5, 4}));
  EXPECT_TRUE(a.intersect({20, 0, 5, 5}).empty());
  EXPECT_EQ(a.shrunk(2), (ms::Rect{2, 2, 6, 6}));
}
