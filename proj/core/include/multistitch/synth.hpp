#pragma once

#include "multistitch/features.hpp"
#include "multistitch/graph.hpp"
#include "multistitch/image.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace multistitch {

enum class TextureKind { Blank, Periodic, BlobNoise };

struct TextureRegion {
  TextureKind kind = TextureKind::Blank;
  Rect bounds;
  /// Grid-line period in pixels (Periodic).
  int period = 20;
  /// Fraction of the region covered by blobs (BlobNoise).
  double density = 0.5;
  /// Gaussian scale of the band-limited noise behind the blobs (BlobNoise).
  double blob_scale = 3.0;
  /// Intensity drop of lines and blobs below the background.
  double contrast = 120.0;
};

struct SceneSpec {
  int width = 512;
  int height = 512;
  double background = 200.0;
  /// Painted in order; later regions overwrite earlier ones.
  std::vector<TextureRegion> regions;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument when a region leaves the canvas or a
  /// period is below 4 px.
  void validate() const;
};

/// Deterministic for a fixed spec. Periodic regions are exact-period grid
/// lines anchored at the canvas origin; blob regions are thresholded,
/// Gaussian-filtered white noise.
Image generate_scene(const SceneSpec& spec);

/// True when `rect` (scene pixels) touches a non-blank region that is not
/// subsequently blanked out.
bool has_texture(const SceneSpec& spec, const Rect& rect);

struct TileGridSpec {
  int rows = 3;
  int cols = 3;
  int tile_size = 256;
  int overlap = 48;
  double jitter_sigma = 0.0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;
  /// Round true offsets to whole pixels.
  bool integer_offsets = true;
  /// Scene position of the nominal origin; leaves room for jitter.
  int margin = 16;

  int step() const { return tile_size - overlap; }
  /// Scene size needed to hold the grid plus margins.
  int scene_width() const { return 2 * margin + (cols - 1) * step() + tile_size; }
  int scene_height() const { return 2 * margin + (rows - 1) * step() + tile_size; }
};

struct GroundTruth {
  /// True tile positions relative to the nominal origin.
  std::vector<Vec2> true_offsets;
  int rows = 0;
  int cols = 0;
  int overlap = 0;
  double jitter_sigma = 0.0;
  double noise_sigma = 0.0;
};

/// Tiles cut from one scene: nodes carry the nominal (jitter-free) grid.
struct TileSet {
  std::vector<TileNode> tiles;
  std::vector<Image> images;
  GroundTruth truth;
  /// Scene coordinates of nominal offset (0, 0).
  Vec2 origin = Vec2::Zero();
};

/// Cuts a rows x cols grid of tiles. True offsets are the regular grid plus
/// Gaussian jitter, nominal offsets the regular grid; every tile gets
/// independent additive Gaussian noise and 8-bit quantization.
/// Throws std::invalid_argument when a tile leaves the scene.
TileSet cut_tiles(const Image& scene, const TileGridSpec& spec);

/// Writes tile PNGs and a manifest.json into `directory`; returns the
/// manifest path.
std::string write_tileset(const TileSet& tiles, const std::string& directory, int min_overlap_px);

/// Candidate multigraph with known ground truth, for solver experiments.
struct SyntheticGraphSpec {
  int rows = 4;
  int cols = 4;
  double spacing = 200.0;
  /// Jitter between nominal and true offsets.
  double nominal_sigma = 2.0;
  /// Noise on the true candidate of each bundle.
  double inlier_sigma = 0.2;
  /// Probability that a bundle has no true candidate.
  double missing_prob = 0.1;
  /// Extra false candidates per bundle, uniformly 0..max_false.
  int max_false = 2;
  /// False candidates deviate from the truth by this much at least.
  double false_min = 12.0;
  double false_max = 40.0;
  double tau = 5.0;
  std::uint64_t seed = 1;
};

struct SyntheticGraph {
  AlignmentMultigraph graph;
  std::vector<Vec2> truth;
  /// Per bundle, the 1-based index of the true candidate or 0.
  std::vector<int> true_candidate;
};

SyntheticGraph synthetic_grid_graph(const SyntheticGraphSpec& spec);

}  // namespace multistitch
