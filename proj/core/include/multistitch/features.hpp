#pragma once

#include "multistitch/image.hpp"

#include <Eigen/Core>

#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <vector>

namespace multistitch {

using Pixel = Eigen::Vector2i;

/// Axis-aligned integer rectangle [x, x+width) x [y, y+height).
struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  bool empty() const { return width <= 0 || height <= 0; }
  bool contains(int px, int py) const {
    return px >= x && py >= y && px < x + width && py < y + height;
  }
  Rect intersect(const Rect& o) const;
  Rect shrunk(int margin) const {
    return {x + margin, y + margin, width - 2 * margin, height - 2 * margin};
  }
  bool operator==(const Rect&) const = default;
};

struct FeatureSet {
  std::vector<Pixel> points;
  int window_radius = 16;
};

struct HarrisParams {
  int max_count = 64;
  double min_distance = 10.0;
  /// Minimum response relative to the strongest response in the search area.
  double quality = 0.01;
  int window_radius = 16;
  /// Gaussian integration scale of the structure tensor.
  double sigma = 1.5;
  double k = 0.04;
};

/// Harris corner response det(M) - k trace(M)^2 for every pixel.
Image harris_response(const Image& image, double sigma = 1.5, double k = 0.04);

/// Picks corners from a precomputed response map: 3x3 local maxima above
/// `quality` times the strongest response inside the search area, ranked by response, greedily thinned
/// to `min_distance`, kept `window_radius` away from the image border and
/// restricted to `roi` when given.
FeatureSet select_features(const Image& response, const HarrisParams& params,
                           const std::optional<Rect>& roi = std::nullopt);

FeatureSet detect_features(const Image& image, const HarrisParams& params,
                           const std::optional<Rect>& roi = std::nullopt);

/// Per-tile cache of Harris response maps. Safe for concurrent use.
class FeatureCache {
 public:
  explicit FeatureCache(HarrisParams params) : params_(params) {}

  const HarrisParams& params() const { return params_; }

  FeatureSet features(int tile_id, const Image& image, const std::optional<Rect>& roi);

 private:
  std::shared_ptr<const Image> response(int tile_id, const Image& image);

  HarrisParams params_;
  std::shared_mutex mutex_;
  std::map<int, std::shared_ptr<const Image>> responses_;
};

}  // namespace multistitch
