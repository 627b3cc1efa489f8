#pragma once

#include "multistitch/correlation.hpp"
#include "multistitch/features.hpp"
#include "multistitch/graph.hpp"
#include "multistitch/image.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace multistitch {

struct RegistrationParams {
  HarrisParams features;
  CorrelationParams correlation;
  PeakParams peaks;
  /// Minimum width of the nominal overlap, in pixels.
  int min_overlap_px = 32;
  /// Minimum length of the nominal overlap along its long side, as a
  /// fraction of the smaller tile dimension. 0.5 keeps edge neighbours and
  /// rejects corner-only (diagonal) overlaps of a regular grid.
  double min_span_fraction = 0.5;
};

/// Nominal overlap of tile b inside tile a's pixel frame (may be empty).
Rect nominal_overlap(const TileNode& a, int wa, int ha, const TileNode& b, int wb, int hb);

bool overlap_qualifies(const Rect& overlap, int wa, int ha, int wb, int hb,
                       const RegistrationParams& params);

/// Correlation evidence for one tile pair, oriented so that i < j.
struct PairSurface {
  int i = 0;
  int j = 0;
  std::optional<CorrelationSurface> surface;
  /// Why no surface was produced, empty on success.
  std::string reason;
};

/// Detects features in the part of tile i overlapping tile j and evaluates
/// the correlation surface around the nominal relative offset.
PairSurface compute_pair_surface(const TileNode& tile_i, const Image& image_i, const TileNode& tile_j,
                                 const Image& image_j, const RegistrationParams& params,
                                 FeatureCache* cache = nullptr);

/// Extracts candidates and wraps them in a bundle with uniform weights.
/// Returns nothing when no candidate survives.
std::optional<EdgeBundle> bundle_from_surface(const PairSurface& pair, const PeakParams& peaks);

/// Full pairwise registration; tiles may be passed in either order.
std::optional<EdgeBundle> register_pair(const TileNode& tile_a, const Image& image_a,
                                        const TileNode& tile_b, const Image& image_b,
                                        const RegistrationParams& params,
                                        FeatureCache* cache = nullptr);

/// All pairs (i < j) whose nominal rectangles overlap enough to register.
std::vector<std::pair<int, int>> overlapping_pairs(const std::vector<TileNode>& tiles,
                                                   const std::vector<Image>& images,
                                                   const RegistrationParams& params);

/// Correlation surfaces for the given pairs, computed on `threads` workers.
/// Output order follows `pairs`.
std::vector<PairSurface> compute_surfaces(const std::vector<TileNode>& tiles,
                                          const std::vector<Image>& images,
                                          const std::vector<std::pair<int, int>>& pairs,
                                          const RegistrationParams& params, int threads = 1);

/// Builds the candidate multigraph: nodes from `tiles`, one bundle per pair
/// with at least one candidate.
AlignmentMultigraph build_multigraph(const std::vector<TileNode>& tiles,
                                     const std::vector<PairSurface>& surfaces,
                                     const PeakParams& peaks, double tau);

}  // namespace multistitch
