#include "oracles.hpp"

#include "multistitch/correlation.hpp"
#include "multistitch/errors.hpp"

#include <gtest/gtest.h>

#include <random>

namespace ms = multistitch;
using ms::Pixel;

namespace {

ms::Image random_image(int w, int h, std::mt19937_64& rng) {
  std::uniform_real_distribution<float> u(0.0f, 255.0f);
  ms::Image img(w, h);
  for (float& v : img.pixels()) v = u(rng);
  return img;
}

// B holds A's content displaced so that A(x) == B(x - shift).
ms::Image shifted(const ms::Image& a, const Pixel& shift, float fill = 0.0f) {
  ms::Image b(a.width(), a.height(), fill);
  for (int y = 0; y < b.height(); ++y)
    for (int x = 0; x < b.width(); ++x) {
      const int sx = x + shift.x();
      const int sy = y + shift.y();
      if (a.contains(sx, sy)) b(x, y) = a(sx, sy);
    }
  return b;
}

ms::CorrelationParams params(int radius) {
  ms::CorrelationParams p;
  p.search_radius = radius;
  p.min_valid_fraction = 0.0;
  return p;
}

ms::CorrelationSurface synthetic_surface(int radius, double fill) {
  ms::CorrelationSurface s(Pixel(100, -4), radius);
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) s.at(dx, dy) = fill;
  return s;
}

}  // namespace

TEST(Correlation, MatchesDefinitionOnSmallPatches) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const auto a = random_image(8, 8, rng);
    const auto b = random_image(8, 8, rng);
    ms::FeatureSet f;
    f.window_radius = 2;
    f.points = {Pixel(3 + t % 2, 4 - t % 3)};
    const Pixel delta0(t % 3 - 1, 0);
    const auto s = ms::correlation_surface(a, b, f, delta0, params(2));
    for (int dy = -2; dy <= 2; ++dy)
      for (int dx = -2; dx <= 2; ++dx) {
        const auto expected = ms::testing::correlation_oracle(a, b, f.points, 2, delta0, dx, dy);
        ASSERT_EQ(expected.has_value(), s.defined(dx, dy)) << dx << "," << dy;
        if (expected) {
          EXPECT_NEAR(s.at(dx, dy), *expected, 1e-10);
        }
      }
  }
}

TEST(Correlation, PerfectAndAntiCorrelation) {
  std::mt19937_64 rng(1);
  const auto a = random_image(60, 50, rng);
  const Pixel delta0(7, -3);
  const auto b = shifted(a, delta0);
  ms::FeatureSet f;
  f.window_radius = 4;
  f.points = {Pixel(20, 20), Pixel(30, 15), Pixel(25, 30)};
  const auto s = ms::correlation_surface(a, b, f, delta0, params(3));
  EXPECT_NEAR(s.at(0, 0), 1.0, 1e-12);
  EXPECT_EQ(s.support(0, 0), 3);
  EXPECT_EQ(s.n_features(), 3);

  ms::Image neg = b;
  for (float& v : neg.pixels()) v = 255.0f - v;
  const auto sn = ms::correlation_surface(a, neg, f, delta0, params(3));
  EXPECT_NEAR(sn.at(0, 0), -1.0, 1e-12);
}

TEST(Correlation, ZeroVarianceWindowsSkipped) {
  std::mt19937_64 rng(2);
  auto a = random_image(40, 40, rng);
  ms::Image flat_b(40, 40, 50.0f);
  ms::FeatureSet f;
  f.window_radius = 3;
  f.points = {Pixel(20, 20)};
  const auto s = ms::correlation_surface(a, flat_b, f, Pixel(0, 0), params(2));
  for (int dy = -2; dy <= 2; ++dy)
    for (int dx = -2; dx <= 2; ++dx) EXPECT_FALSE(s.defined(dx, dy));

  // A flat template contributes nothing either.
  ms::Image flat_a(40, 40, 7.0f);
  const auto s2 = ms::correlation_surface(flat_a, a, f, Pixel(0, 0), params(2));
  EXPECT_EQ(s2.n_features(), 0);
  EXPECT_FALSE(s2.defined(0, 0));
}

TEST(Correlation, WindowsLeavingBAreDropped) {
  std::mt19937_64 rng(3);
  const auto a = random_image(30, 30, rng);
  const auto b = random_image(30, 30, rng);
  ms::FeatureSet f;
  f.window_radius = 3;
  f.points = {Pixel(5, 15), Pixel(20, 15)};
  const auto s = ms::correlation_surface(a, b, f, Pixel(0, 0), params(4));
  // Shift +4 moves the first window to x = 1, outside B.
  EXPECT_EQ(s.support(4, 0), 1);
  EXPECT_EQ(s.support(0, 0), 2);
  const auto expected = ms::testing::correlation_oracle(a, b, f.points, 3, Pixel(0, 0), 4, 0);
  EXPECT_NEAR(s.at(4, 0), *expected, 1e-10);
}

TEST(Correlation, MinValidFractionLeavesSparseCellsUndefined) {
  std::mt19937_64 rng(4);
  const auto a = random_image(30, 30, rng);
  const auto b = random_image(30, 30, rng);
  ms::FeatureSet f;
  f.window_radius = 3;
  f.points = {Pixel(5, 15), Pixel(20, 15), Pixel(21, 8)};
  ms::CorrelationParams p = params(4);
  p.min_valid_fraction = 0.9;
  const auto s = ms::correlation_surface(a, b, f, Pixel(0, 0), p);
  EXPECT_FALSE(s.defined(4, 0));
  EXPECT_TRUE(s.defined(0, 0));
}

TEST(Correlation, Errors) {
  const ms::Image a(30, 30, 1.0f);
  ms::FeatureSet empty;
  EXPECT_THROW(ms::correlation_surface(a, a, empty, Pixel(0, 0), params(2)), std::invalid_argument);
  ms::FeatureSet f;
  f.window_radius = 3;
  f.points = {Pixel(10, 10)};
  EXPECT_THROW(ms::correlation_surface(a, a, f, Pixel(500, 0), params(2)), ms::PipelineError);
}

TEST(Peaks, SinglePeak) {
  auto s = synthetic_surface(5, 0.1);
  s.at(2, -1) = 0.9;
  const auto c = ms::extract_candidates(s, {});
  ASSERT_EQ(c.size(), 1u);
  EXPECT_NEAR(c[0].delta.x(), 102.0, 1e-12);
  EXPECT_NEAR(c[0].delta.y(), -5.0, 1e-12);
  EXPECT_NEAR(c[0].score, 0.9, 1e-12);
}

TEST(Peaks, AllBelowThreshold) {
  auto s = synthetic_surface(5, 0.1);
  s.at(0, 0) = 0.45;
  EXPECT_TRUE(ms::extract_candidates(s, {}).empty());
  EXPECT_TRUE(ms::extract_candidates(ms::CorrelationSurface(Pixel(0, 0), 3), {}).empty());
}

TEST(Peaks, PeriodicSurfaceGivesPeriodSpacedCandidates) {
  const int R = 16;
  const int period = 7;
  ms::CorrelationSurface s(Pixel(0, 0), R);
  for (int dy = -R; dy <= R; ++dy)
    for (int dx = -R; dx <= R; ++dx)
      s.at(dx, dy) = 0.1 + 0.7 * std::pow(std::cos(M_PI * dx / period), 2) *
                               std::pow(std::cos(M_PI * dy / period), 2);
  ms::PeakParams p;
  p.max_candidates = 100;
  const auto c = ms::extract_candidates(s, p);
  // Interior maxima at multiples of 7 within (-16, 16): 5 per axis.
  ASSERT_EQ(c.size(), 25u);
  for (const auto& k : c) {
    EXPECT_NEAR(std::remainder(k.delta.x(), period), 0.0, 1e-9);
    EXPECT_NEAR(std::remainder(k.delta.y(), period), 0.0, 1e-9);
    EXPECT_NEAR(k.score, 0.8, 1e-9);
  }
}

TEST(Peaks, QuadraticRefinementIsExactForSeparableParabola) {
  const int R = 6;
  ms::CorrelationSurface s(Pixel(10, 20), R);
  for (int dy = -R; dy <= R; ++dy)
    for (int dx = -R; dx <= R; ++dx)
      s.at(dx, dy) = 0.95 - 0.02 * (dx - 1.3) * (dx - 1.3) - 0.03 * (dy + 2.2) * (dy + 2.2);
  const auto c = ms::extract_candidates(s, {});
  ASSERT_EQ(c.size(), 1u);
  EXPECT_NEAR(c[0].delta.x(), 11.3, 1e-12);
  EXPECT_NEAR(c[0].delta.y(), 17.8, 1e-12);
  EXPECT_NEAR(c[0].score, 0.95, 1e-12);
}

TEST(Peaks, SortingSuppressionAndTruncation) {
  auto s = synthetic_surface(10, 0.0);
  s.at(-5, -5) = 0.6;
  s.at(5, 5) = 0.8;
  s.at(0, 0) = 0.7;
  s.at(2, 1) = 0.75;  // suppresses (0, 0)
  ms::PeakParams p;
  p.rel_threshold = 0.0;
  auto c = ms::extract_candidates(s, p);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_NEAR(c[0].score, 0.8, 1e-12);
  EXPECT_NEAR(c[1].score, 0.75, 1e-12);
  EXPECT_NEAR(c[2].score, 0.6, 1e-12);

  p.max_candidates = 2;
  EXPECT_EQ(ms::extract_candidates(s, p).size(), 2u);

  p.max_candidates = 8;
  p.rel_threshold = 0.9;  // 0.72 cut
  EXPECT_EQ(ms::extract_candidates(s, p).size(), 2u);
}

TEST(Peaks, BorderAndPlateauCellsAreNotStrictMaxima) {
  auto s = synthetic_surface(4, 0.1);
  s.at(4, 0) = 0.9;   // on the border
  s.at(0, 0) = 0.8;
  s.at(1, 0) = 0.8;   // plateau
  EXPECT_TRUE(ms::extract_candidates(s, {}).empty());
}
