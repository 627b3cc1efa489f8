#include "multistitch/synth.hpp"

#include "multistitch/manifest.hpp"

#include "filter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <stdexcept>

namespace multistitch {

void SceneSpec::validate() const {
  if (width < 1 || height < 1) throw std::invalid_argument("scene size must be positive");
  const Rect canvas{0, 0, width, height};
  for (const auto& r : regions) {
    if (r.bounds.empty() || r.bounds.intersect(canvas) != r.bounds)
      throw std::invalid_argument("texture region must lie inside the canvas");
    if (r.kind == TextureKind::Periodic && r.period < 4)
      throw std::invalid_argument("period must be at least 4 px");
    if (r.kind == TextureKind::BlobNoise && (r.density <= 0.0 || r.density >= 1.0))
      throw std::invalid_argument("blob density must lie in (0, 1)");
  }
}

namespace {

std::uint64_t region_seed(std::uint64_t seed, std::size_t index) {
  // splitmix64 step, so neighbouring indices give unrelated streams
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void paint_periodic(Image& img, const TextureRegion& r, double background) {
  const int line = std::max(2, r.period / 6);
  for (int y = r.bounds.y; y < r.bounds.y + r.bounds.height; ++y) {
    for (int x = r.bounds.x; x < r.bounds.x + r.bounds.width; ++x) {
      const bool on = (x % r.period) < line || (y % r.period) < line;
      img(x, y) = static_cast<float>(on ? background - r.contrast : background);
    }
  }
}

void paint_blobs(Image& img, const TextureRegion& r, double background, std::uint64_t seed) {
  const int w = r.bounds.width;
  const int h = r.bounds.height;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> field(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  for (double& v : field) v = normal(rng);
  field = detail::smooth(field, w, h, detail::gaussian_kernel(r.blob_scale));

  std::vector<double> sorted = field;
  const auto q = static_cast<std::size_t>((1.0 - r.density) * static_cast<double>(sorted.size() - 1));
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(q), sorted.end());
  const double threshold = sorted[q];

  std::vector<double> mask(field.size());
  for (std::size_t k = 0; k < field.size(); ++k) mask[k] = field[k] > threshold ? 1.0 : 0.0;
  mask = detail::smooth(mask, w, h, detail::gaussian_kernel(0.8));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double m = mask[static_cast<std::size_t>(y * w + x)];
      img(r.bounds.x + x, r.bounds.y + y) = static_cast<float>(background - r.contrast * m);
    }
  }
}

}  // namespace

Image generate_scene(const SceneSpec& spec) {
  spec.validate();
  Image img(spec.width, spec.height, static_cast<float>(spec.background));
  for (std::size_t k = 0; k < spec.regions.size(); ++k) {
    const auto& r = spec.regions[k];
    switch (r.kind) {
      case TextureKind::Blank:
        for (int y = r.bounds.y; y < r.bounds.y + r.bounds.height; ++y)
          for (int x = r.bounds.x; x < r.bounds.x + r.bounds.width; ++x)
            img(x, y) = static_cast<float>(spec.background);
        break;
      case TextureKind::Periodic:
        paint_periodic(img, r, spec.background);
        break;
      case TextureKind::BlobNoise:
        paint_blobs(img, r, spec.background, region_seed(spec.seed, k));
        break;
    }
  }
  return img;
}

bool has_texture(const SceneSpec& spec, const Rect& rect) {
  const Rect area = rect.intersect({0, 0, spec.width, spec.height});
  for (int y = area.y; y < area.y + area.height; ++y) {
    for (int x = area.x; x < area.x + area.width; ++x) {
      for (auto it = spec.regions.rbegin(); it != spec.regions.rend(); ++it) {
        if (!it->bounds.contains(x, y)) continue;
        if (it->kind != TextureKind::Blank && it->contrast != 0.0) return true;
        break;
      }
    }
  }
  return false;
}

TileSet cut_tiles(const Image& scene, const TileGridSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1 || spec.tile_size < 8)
    throw std::invalid_argument("tile grid too small");
  if (spec.overlap < 0 || spec.overlap >= spec.tile_size)
    throw std::invalid_argument("overlap must lie in [0, tile_size)");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  TileSet out;
  out.origin = Vec2(spec.margin, spec.margin);
  out.truth.rows = spec.rows;
  out.truth.cols = spec.cols;
  out.truth.overlap = spec.overlap;
  out.truth.jitter_sigma = spec.jitter_sigma;
  out.truth.noise_sigma = spec.noise_sigma;

  const int n = spec.rows * spec.cols;
  for (int id = 0; id < n; ++id) {
    const int r = id / spec.cols;
    const int c = id % spec.cols;
    const Vec2 nominal(c * spec.step(), r * spec.step());
    Vec2 jitter(spec.jitter_sigma * normal(rng), spec.jitter_sigma * normal(rng));
    if (spec.integer_offsets) jitter = jitter.array().round().matrix();
    out.truth.true_offsets.push_back(nominal + jitter);

    TileNode node;
    node.id = id;
    char name[32];
    std::snprintf(name, sizeof name, "tile_%03d.png", id);
    node.image_ref = name;
    node.nominal_offset = nominal;
    out.tiles.push_back(node);
  }

  for (int id = 0; id < n; ++id) {
    const Vec2 pos = out.origin + out.truth.true_offsets[static_cast<std::size_t>(id)];
    const int s = spec.tile_size;
    Image tile;
    if (spec.integer_offsets) {
      const int x0 = static_cast<int>(std::lround(pos.x()));
      const int y0 = static_cast<int>(std::lround(pos.y()));
      if (x0 < 0 || y0 < 0 || x0 + s > scene.width() || y0 + s > scene.height())
        throw std::invalid_argument("tile leaves the scene; enlarge the scene or margin");
      tile = scene.crop(x0, y0, s, s);
    } else {
      if (pos.x() < 0 || pos.y() < 0 || pos.x() + s > scene.width() - 1 ||
          pos.y() + s > scene.height() - 1)
        throw std::invalid_argument("tile leaves the scene; enlarge the scene or margin");
      tile = Image(s, s);
      for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x)
          tile(x, y) = static_cast<float>(scene.sample_bilinear(pos.x() + x, pos.y() + y));
    }
    tile.set_max_value(255.0f);
    for (float& v : tile.pixels()) {
      const double noisy = v + spec.noise_sigma * normal(rng);
      v = static_cast<float>(std::clamp(std::round(noisy), 0.0, 255.0));
    }
    out.images.push_back(std::move(tile));
  }
  return out;
}

std::string write_tileset(const TileSet& tiles, const std::string& directory, int min_overlap_px) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  TileManifest manifest;
  manifest.tiles = tiles.tiles;
  manifest.min_overlap_px = min_overlap_px;
  for (std::size_t k = 0; k < tiles.tiles.size(); ++k)
    save_png8(tiles.images[k], (fs::path(directory) / tiles.tiles[k].image_ref).string());
  const auto path = (fs::path(directory) / "manifest.json").string();
  save_manifest(manifest, path);
  return path;
}

SyntheticGraph synthetic_grid_graph(const SyntheticGraphSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1) throw std::invalid_argument("grid too small");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SyntheticGraph out;
  out.graph = AlignmentMultigraph(spec.tau);
  const int n = spec.rows * spec.cols;
  for (int id = 0; id < n; ++id) {
    TileNode node;
    node.id = id;
    node.image_ref = "synthetic";
    node.nominal_offset = Vec2((id % spec.cols) * spec.spacing, (id / spec.cols) * spec.spacing);
    out.truth.push_back(node.nominal_offset +
                        spec.nominal_sigma * Vec2(normal(rng), normal(rng)));
    out.graph.add_node(node);
  }

  auto add = [&](int i, int j) {
    const Vec2 true_delta = out.truth[static_cast<std::size_t>(j)] - out.truth[static_cast<std::size_t>(i)];
    std::vector<std::pair<CandidateTransform, bool>> cands;
    if (unit(rng) >= spec.missing_prob) {
      CandidateTransform c;
      c.delta = true_delta + spec.inlier_sigma * Vec2(normal(rng), normal(rng));
      c.score = 0.7 + 0.3 * unit(rng);
      cands.emplace_back(c, true);
    }
    int n_false = static_cast<int>(unit(rng) * (spec.max_false + 1));
    n_false = std::min(n_false, spec.max_false);
    if (cands.empty()) n_false = std::max(n_false, 1);
    for (int k = 0; k < n_false; ++k) {
      const double angle = 2.0 * std::numbers::pi * unit(rng);
      const double radius = spec.false_min + (spec.false_max - spec.false_min) * unit(rng);
      CandidateTransform c;
      c.delta = true_delta + radius * Vec2(std::cos(angle), std::sin(angle));
      c.score = 0.5 + 0.5 * unit(rng);
      cands.emplace_back(c, false);
    }
    std::shuffle(cands.begin(), cands.end(), rng);
    EdgeBundle b;
    b.i = i;
    b.j = j;
    int truth_index = 0;
    for (std::size_t k = 0; k < cands.size(); ++k) {
      b.candidates.push_back(cands[k].first);
      if (cands[k].second) truth_index = static_cast<int>(k) + 1;
    }
    out.true_candidate.push_back(truth_index);
    out.graph.add_bundle(std::move(b));
  };

  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      const int id = r * spec.cols + c;
      if (c + 1 < spec.cols) add(id, id + 1);
      if (r + 1 < spec.rows) add(id, id + spec.cols);
    }
  }
  return out;
}

}  // namespace multistitch
