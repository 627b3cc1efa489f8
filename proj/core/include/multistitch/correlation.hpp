#pragma once

#include "multistitch/features.hpp"
#include "multistitch/graph.hpp"
#include "multistitch/image.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace multistitch {

/// Mean windowed Pearson correlation over a square grid of integer shifts.
///
/// For a shift d the feature point x in image A is compared against the
/// window centred at x - (origin + d) in image B, i.e. `origin + d` is the
/// position of B relative to A. Undefined cells hold NaN.
class CorrelationSurface {
 public:
  CorrelationSurface() = default;
  CorrelationSurface(Pixel origin, int search_radius);

  const Pixel& origin() const { return origin_; }
  int radius() const { return radius_; }
  int side() const { return 2 * radius_ + 1; }
  int n_features() const { return n_features_; }
  void set_n_features(int n) { n_features_ = n; }

  bool defined(int dx, int dy) const { return !std::isnan(at(dx, dy)); }
  double at(int dx, int dy) const { return values_[index(dx, dy)]; }
  double& at(int dx, int dy) { return values_[index(dx, dy)]; }
  /// Number of feature windows that contributed to a cell.
  int support(int dx, int dy) const { return support_[index(dx, dy)]; }
  int& support(int dx, int dy) { return support_[index(dx, dy)]; }

  bool in_range(int dx, int dy) const {
    return dx >= -radius_ && dx <= radius_ && dy >= -radius_ && dy <= radius_;
  }

  static constexpr double undefined() { return std::numeric_limits<double>::quiet_NaN(); }

 private:
  std::size_t index(int dx, int dy) const {
    return static_cast<std::size_t>((dy + radius_) * side() + (dx + radius_));
  }

  Pixel origin_ = Pixel::Zero();
  int radius_ = 0;
  int n_features_ = 0;
  std::vector<double> values_;
  std::vector<int> support_;
};

struct CorrelationParams {
  int search_radius = 32;
  /// Cells backed by fewer than this fraction of the usable features are
  /// left undefined. Zero keeps every cell with at least one window.
  double min_valid_fraction = 0.25;
};

/// Evaluates the windowed correlation for every shift within
/// `search_radius` of `delta0`. Windows leaving image B are dropped for that
/// shift, zero-variance windows are skipped.
///
/// Throws std::invalid_argument for an empty feature set and PipelineError
/// when no window fits inside B for any shift.
CorrelationSurface correlation_surface(const Image& a, const Image& b, const FeatureSet& features,
                                       const Pixel& delta0, const CorrelationParams& params);

struct PeakParams {
  double abs_threshold = 0.5;
  double rel_threshold = 0.7;
  int nms_radius = 3;
  int max_candidates = 8;
};

/// Strict local maxima above both thresholds, suppressed within
/// `nms_radius` (Chebyshev), sorted by score, refined to sub-pixel
/// precision with a separable quadratic fit.
std::vector<CandidateTransform> extract_candidates(const CorrelationSurface& surface,
                                                   const PeakParams& params);

}  // namespace multistitch
