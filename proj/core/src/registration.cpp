#include "multistitch/registration.hpp"

#include "multistitch/errors.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace multistitch {

namespace {

Pixel rounded(const Vec2& v) {
  return {static_cast<int>(std::lround(v.x())), static_cast<int>(std::lround(v.y()))};
}

}  // namespace

Rect nominal_overlap(const TileNode& a, int wa, int ha, const TileNode& b, int wb, int hb) {
  const Pixel rel = rounded(b.nominal_offset - a.nominal_offset);
  return Rect{0, 0, wa, ha}.intersect(Rect{rel.x(), rel.y(), wb, hb});
}

bool overlap_qualifies(const Rect& overlap, int wa, int ha, int wb, int hb,
                       const RegistrationParams& params) {
  if (overlap.empty()) return false;
  const int narrow = std::min(overlap.width, overlap.height);
  const int wide = std::max(overlap.width, overlap.height);
  const int smallest = std::min({wa, ha, wb, hb});
  return narrow >= params.min_overlap_px &&
         wide >= static_cast<int>(std::ceil(params.min_span_fraction * smallest));
}

PairSurface compute_pair_surface(const TileNode& tile_i, const Image& image_i, const TileNode& tile_j,
                                 const Image& image_j, const RegistrationParams& params,
                                 FeatureCache* cache) {
  if (tile_i.id >= tile_j.id) throw std::invalid_argument("compute_pair_surface expects i < j");
  PairSurface out{tile_i.id, tile_j.id, std::nullopt, {}};

  const Rect overlap = nominal_overlap(tile_i, image_i.width(), image_i.height(), tile_j,
                                       image_j.width(), image_j.height());
  if (!overlap_qualifies(overlap, image_i.width(), image_i.height(), image_j.width(),
                         image_j.height(), params)) {
    out.reason = "nominal overlap below minimum";
    return out;
  }
  // Feature windows must lie inside the nominal overlap.
  const Rect roi = overlap.shrunk(params.features.window_radius);
  if (roi.empty()) {
    out.reason = "overlap narrower than the correlation window";
    return out;
  }
  FeatureSet features = cache ? cache->features(tile_i.id, image_i, roi)
                              : detect_features(image_i, params.features, roi);
  if (features.points.empty()) {
    out.reason = "no features in overlap";
    return out;
  }
  const Pixel delta0 = rounded(tile_j.nominal_offset - tile_i.nominal_offset);
  try {
    out.surface = correlation_surface(image_i, image_j, features, delta0, params.correlation);
  } catch (const PipelineError& e) {
    out.reason = e.what();
  }
  return out;
}

std::optional<EdgeBundle> bundle_from_surface(const PairSurface& pair, const PeakParams& peaks) {
  if (!pair.surface) return std::nullopt;
  auto candidates = extract_candidates(*pair.surface, peaks);
  if (candidates.empty()) return std::nullopt;
  EdgeBundle bundle;
  bundle.i = pair.i;
  bundle.j = pair.j;
  bundle.candidates = std::move(candidates);
  bundle.weights.assign(bundle.size(), 1.0 / static_cast<double>(bundle.size()));
  return bundle;
}

std::optional<EdgeBundle> register_pair(const TileNode& tile_a, const Image& image_a,
                                        const TileNode& tile_b, const Image& image_b,
                                        const RegistrationParams& params, FeatureCache* cache) {
  const bool swapped = tile_a.id > tile_b.id;
  const PairSurface pair = swapped
                               ? compute_pair_surface(tile_b, image_b, tile_a, image_a, params, cache)
                               : compute_pair_surface(tile_a, image_a, tile_b, image_b, params, cache);
  auto bundle = bundle_from_surface(pair, params.peaks);
  if (!bundle) {
    spdlog::debug("pair ({}, {}): no bundle ({})", pair.i, pair.j,
                  pair.reason.empty() ? "no candidate above threshold" : pair.reason);
  }
  return bundle;
}

std::vector<std::pair<int, int>> overlapping_pairs(const std::vector<TileNode>& tiles,
                                                   const std::vector<Image>& images,
                                                   const RegistrationParams& params) {
  if (tiles.size() != images.size()) throw std::invalid_argument("tile/image count mismatch");
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t a = 0; a < tiles.size(); ++a) {
    for (std::size_t b = a + 1; b < tiles.size(); ++b) {
      const auto& ia = images[a];
      const auto& ib = images[b];
      const Rect ov = nominal_overlap(tiles[a], ia.width(), ia.height(), tiles[b], ib.width(), ib.height());
      if (overlap_qualifies(ov, ia.width(), ia.height(), ib.width(), ib.height(), params)) {
        pairs.emplace_back(tiles[a].id, tiles[b].id);
      }
    }
  }
  return pairs;
}

std::vector<PairSurface> compute_surfaces(const std::vector<TileNode>& tiles,
                                          const std::vector<Image>& images,
                                          const std::vector<std::pair<int, int>>& pairs,
                                          const RegistrationParams& params, int threads) {
  FeatureCache cache(params.features);
  std::vector<PairSurface> out(pairs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < pairs.size(); k = next++) {
      const auto [i, j] = pairs[k];
      const auto lo = static_cast<std::size_t>(std::min(i, j));
      const auto hi = static_cast<std::size_t>(std::max(i, j));
      out[k] = compute_pair_surface(tiles[lo], images[lo], tiles[hi], images[hi], params, &cache);
    }
  };
  const int n = std::max(1, threads);
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  return out;
}

AlignmentMultigraph build_multigraph(const std::vector<TileNode>& tiles,
                                     const std::vector<PairSurface>& surfaces,
                                     const PeakParams& peaks, double tau) {
  AlignmentMultigraph graph(tau);
  for (const auto& t : tiles) {
    TileNode n = t;
    n.solved_offset.reset();
    graph.add_node(std::move(n));
  }
  for (const auto& s : surfaces) {
    auto bundle = bundle_from_surface(s, peaks);
    if (bundle) {
      spdlog::debug("pair ({}, {}): {} candidate(s)", s.i, s.j, bundle->candidates.size());
      graph.add_bundle(std::move(*bundle));
    } else {
      spdlog::debug("pair ({}, {}): no bundle ({})", s.i, s.j,
                   s.reason.empty() ? "no candidate above threshold" : s.reason);
    }
  }
  return graph;
}

}  // namespace multistitch
