#include "multistitch/registration.hpp"
#include "multistitch/synth.hpp"

#include <gtest/gtest.h>

namespace ms = multistitch;
using ms::Vec2;

namespace {

ms::TextureRegion region(ms::TextureKind kind, const ms::Rect& r, double contrast = 120.0) {
  ms::TextureRegion t;
  t.kind = kind;
  t.bounds = r;
  t.contrast = contrast;
  return t;
}

// Two tiles side by side cut from one scene.
ms::TileSet pair_from(ms::TextureKind kind, std::uint64_t seed, double jitter = 2.0) {
  ms::TileGridSpec grid;
  grid.rows = 1;
  grid.cols = 2;
  grid.tile_size = 128;
  grid.overlap = 48;
  grid.jitter_sigma = jitter;
  grid.noise_sigma = 2.0;
  grid.seed = seed;
  ms::SceneSpec scene;
  scene.width = grid.scene_width();
  scene.height = grid.scene_height();
  scene.seed = seed;
  if (kind != ms::TextureKind::Blank) scene.regions.push_back(region(kind, {0, 0, scene.width, scene.height}));
  return ms::cut_tiles(ms::generate_scene(scene), grid);
}

ms::RegistrationParams small_params() {
  ms::RegistrationParams p;
  p.features.window_radius = 10;
  p.correlation.search_radius = 16;
  p.min_overlap_px = 24;
  return p;
}

}  // namespace

TEST(Registration, TexturedPairRecoversTruth) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto t = pair_from(ms::TextureKind::BlobNoise, seed);
    const auto b = ms::register_pair(t.tiles[0], t.images[0], t.tiles[1], t.images[1], small_params());
    ASSERT_TRUE(b.has_value());
    ASSERT_EQ(b->candidates.size(), 1u);
    const Vec2 truth = t.truth.true_offsets[1] - t.truth.true_offsets[0];
    EXPECT_LT((b->candidates[0].delta - truth).norm(), 0.5);
    EXPECT_GT(b->candidates[0].score, 0.9);
    EXPECT_EQ(b->i, 0);
    EXPECT_EQ(b->j, 1);
    EXPECT_EQ(b->weights, (std::vector<double>{0.5, 0.5}));
  }
}

TEST(Registration, BlankOverlapGivesNoBundle) {
  const auto t = pair_from(ms::TextureKind::Blank, 3);
  EXPECT_FALSE(ms::register_pair(t.tiles[0], t.images[0], t.tiles[1], t.images[1], small_params()));
}

TEST(Registration, PeriodicOverlapGivesPeriodSpacedCandidates) {
  const auto t = pair_from(ms::TextureKind::Periodic, 5);
  auto p = small_params();
  p.correlation.search_radius = 24;
  const auto b = ms::register_pair(t.tiles[0], t.images[0], t.tiles[1], t.images[1], p);
  ASSERT_TRUE(b.has_value());
  ASSERT_GE(b->candidates.size(), 2u);
  const Vec2 truth = t.truth.true_offsets[1] - t.truth.true_offsets[0];
  bool has_truth = false;
  for (const auto& c : b->candidates) {
    const Vec2 off = c.delta - truth;
    EXPECT_NEAR(std::remainder(off.x(), 20.0), 0.0, 0.5);
    EXPECT_NEAR(std::remainder(off.y(), 20.0), 0.0, 0.5);
    has_truth |= off.norm() < 0.5;
  }
  EXPECT_TRUE(has_truth);
}

TEST(Registration, SwappingTileRolesNegatesTopCandidate) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto t = pair_from(ms::TextureKind::BlobNoise, seed);
    const auto ab = ms::register_pair(t.tiles[0], t.images[0], t.tiles[1], t.images[1], small_params());
    // Relabel so the right tile becomes node 0 and features come from it.
    ms::TileNode right = t.tiles[1];
    ms::TileNode left = t.tiles[0];
    right.id = 0;
    left.id = 1;
    const auto ba = ms::register_pair(right, t.images[1], left, t.images[0], small_params());
    ASSERT_TRUE(ab && ba);
    EXPECT_LT((ab->candidates[0].delta + ba->candidates[0].delta).norm(), 0.1);
  }
}

TEST(Registration, GridPairsAndEligibility) {
  std::vector<ms::TileNode> tiles;
  std::vector<ms::Image> images;
  for (int id = 0; id < 9; ++id) {
    tiles.push_back({id, "", Vec2((id % 3) * 208.0, (id / 3) * 208.0), {}});
    images.emplace_back(256, 256);
  }
  ms::RegistrationParams p;
  const auto pairs = ms::overlapping_pairs(tiles, images, p);
  EXPECT_EQ(pairs.size(), 12u);
  for (const auto& [i, j] : pairs) {
    EXPECT_LT(i, j);
    EXPECT_TRUE(j - i == 1 || j - i == 3);
  }
  p.min_overlap_px = 49;
  EXPECT_TRUE(ms::overlapping_pairs(tiles, images, p).empty());

  std::vector<ms::TileNode> apart = {{0, "", Vec2(0, 0), {}}, {1, "", Vec2(1000, 0), {}}};
  EXPECT_TRUE(ms::overlapping_pairs(apart, {images[0], images[1]}, {}).empty());
}

TEST(Registration, ThreadCountDoesNotChangeSurfaces) {
  ms::SceneSpec scene;
  ms::TileGridSpec grid;
  grid.rows = 2;
  grid.cols = 3;
  grid.tile_size = 128;
  grid.overlap = 48;
  grid.jitter_sigma = 2.0;
  grid.noise_sigma = 3.0;
  scene.width = grid.scene_width();
  scene.height = grid.scene_height();
  scene.regions.push_back(region(ms::TextureKind::BlobNoise, {0, 0, scene.width, scene.height}));
  const auto t = ms::cut_tiles(ms::generate_scene(scene), grid);
  const auto p = small_params();
  const auto pairs = ms::overlapping_pairs(t.tiles, t.images, p);
  ASSERT_EQ(pairs.size(), 7u);
  const auto one = ms::compute_surfaces(t.tiles, t.images, pairs, p, 1);
  const auto three = ms::compute_surfaces(t.tiles, t.images, pairs, p, 3);
  const auto g1 = ms::build_multigraph(t.tiles, one, p.peaks, 5.0);
  const auto g3 = ms::build_multigraph(t.tiles, three, p.peaks, 5.0);
  ASSERT_EQ(g1.num_bundles(), g3.num_bundles());
  for (std::size_t b = 0; b < g1.num_bundles(); ++b) {
    ASSERT_EQ(g1.bundles()[b].candidates.size(), g3.bundles()[b].candidates.size());
    for (std::size_t k = 0; k < g1.bundles()[b].candidates.size(); ++k) {
      EXPECT_EQ(g1.bundles()[b].candidates[k].delta, g3.bundles()[b].candidates[k].delta);
      EXPECT_EQ(g1.bundles()[b].candidates[k].score, g3.bundles()[b].candidates[k].score);
    }
  }
}
