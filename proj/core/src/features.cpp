#include "multistitch/features.hpp"

#include "filter.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace multistitch {

Rect Rect::intersect(const Rect& o) const {
  const int x0 = std::max(x, o.x);
  const int y0 = std::max(y, o.y);
  const int x1 = std::min(x + width, o.x + o.width);
  const int y1 = std::min(y + height, o.y + o.height);
  return {x0, y0, std::max(0, x1 - x0), std::max(0, y1 - y0)};
}

using detail::gaussian_kernel;
using detail::smooth;

Image harris_response(const Image& image, double sigma, double k) {
  const int w = image.width();
  const int h = image.height();
  Image response(w, h);
  if (w < 3 || h < 3) return response;

  const auto n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  std::vector<double> ixx(n), iyy(n), ixy(n);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = 0.5 * (image(std::min(x + 1, w - 1), y) - image(std::max(x - 1, 0), y));
      const double gy = 0.5 * (image(x, std::min(y + 1, h - 1)) - image(x, std::max(y - 1, 0)));
      const auto i = static_cast<std::size_t>(y * w + x);
      ixx[i] = gx * gx;
      iyy[i] = gy * gy;
      ixy[i] = gx * gy;
    }
  }
  const auto kernel = gaussian_kernel(sigma);
  const auto sxx = smooth(ixx, w, h, kernel);
  const auto syy = smooth(iyy, w, h, kernel);
  const auto sxy = smooth(ixy, w, h, kernel);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto i = static_cast<std::size_t>(y * w + x);
      const double det = sxx[i] * syy[i] - sxy[i] * sxy[i];
      const double tr = sxx[i] + syy[i];
      response(x, y) = static_cast<float>(det - k * tr * tr);
    }
  }
  return response;
}

FeatureSet select_features(const Image& response, const HarrisParams& params,
                           const std::optional<Rect>& roi) {
  if (params.max_count < 1) throw std::invalid_argument("max_count must be >= 1");
  FeatureSet out;
  out.window_radius = params.window_radius;

  const int w = response.width();
  const int h = response.height();
  const int r = params.window_radius;
  Rect area{r, r, w - 2 * r, h - 2 * r};
  if (roi) area = area.intersect(*roi);
  if (area.empty()) return out;

  float max_response = 0.0f;
  for (int y = area.y; y < area.y + area.height; ++y) {
    for (int x = area.x; x < area.x + area.width; ++x) max_response = std::max(max_response, response(x, y));
  }
  if (!(max_response > 0.0f)) return out;
  const double threshold = params.quality * max_response;

  struct Scored {
    float value;
    Pixel p;
  };
  std::vector<Scored> maxima;
  for (int y = area.y; y < area.y + area.height; ++y) {
    for (int x = area.x; x < area.x + area.width; ++x) {
      const float v = response(x, y);
      if (!(v > 0.0f) || v < threshold) continue;
      bool is_max = true;
      // Ties resolve to the first pixel in raster order.
      for (int dy = -1; dy <= 1 && is_max; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int xx = x + dx;
          const int yy = y + dy;
          if (!response.contains(xx, yy)) continue;
          const float nv = response(xx, yy);
          const bool before = dy < 0 || (dy == 0 && dx < 0);
          if (nv > v || (before && nv == v)) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) maxima.push_back({v, Pixel(x, y)});
    }
  }
  std::stable_sort(maxima.begin(), maxima.end(),
                   [](const Scored& a, const Scored& b) { return a.value > b.value; });

  const double min_d2 = params.min_distance * params.min_distance;
  for (const auto& m : maxima) {
    if (static_cast<int>(out.points.size()) >= params.max_count) break;
    bool far = true;
    for (const auto& p : out.points) {
      if ((p - m.p).cast<double>().squaredNorm() < min_d2) {
        far = false;
        break;
      }
    }
    if (far) out.points.push_back(m.p);
  }
  return out;
}

FeatureSet detect_features(const Image& image, const HarrisParams& params,
                           const std::optional<Rect>& roi) {
  return select_features(harris_response(image, params.sigma, params.k), params, roi);
}

std::shared_ptr<const Image> FeatureCache::response(int tile_id, const Image& image) {
  {
    std::shared_lock lock(mutex_);
    auto it = responses_.find(tile_id);
    if (it != responses_.end()) return it->second;
  }
  auto computed = std::make_shared<const Image>(harris_response(image, params_.sigma, params_.k));
  std::unique_lock lock(mutex_);
  auto [it, inserted] = responses_.emplace(tile_id, std::move(computed));
  return it->second;
}

FeatureSet FeatureCache::features(int tile_id, const Image& image, const std::optional<Rect>& roi) {
  return select_features(*response(tile_id, image), params_, roi);
}

}  // namespace multistitch
