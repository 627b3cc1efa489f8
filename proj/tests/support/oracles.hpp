#pragma once

#include "multistitch/features.hpp"
#include "multistitch/image.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace multistitch::testing {

/// Mean windowed Pearson correlation for one shift, straight from the
/// definition: for each feature p, the window around p in A against the
/// window around p - (delta0 + d) in B, two-pass means, windows leaving B or
/// with zero variance skipped. Nothing when no window contributes.
inline std::optional<double> correlation_oracle(const Image& a, const Image& b,
                                                const std::vector<Pixel>& points, int r,
                                                const Pixel& delta0, int dx, int dy) {
  double total = 0.0;
  int count = 0;
  for (const Pixel& p : points) {
    const int bx = p.x() - delta0.x() - dx;
    const int by = p.y() - delta0.y() - dy;
    if (bx - r < 0 || by - r < 0 || bx + r >= b.width() || by + r >= b.height()) continue;
    double ma = 0.0;
    double mb = 0.0;
    const double n = (2.0 * r + 1) * (2.0 * r + 1);
    for (int v = -r; v <= r; ++v) {
      for (int u = -r; u <= r; ++u) {
        ma += a(p.x() + u, p.y() + v);
        mb += b(bx + u, by + v);
      }
    }
    ma /= n;
    mb /= n;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (int v = -r; v <= r; ++v) {
      for (int u = -r; u <= r; ++u) {
        const double x = a(p.x() + u, p.y() + v) - ma;
        const double y = b(bx + u, by + v) - mb;
        sab += x * y;
        saa += x * x;
        sbb += y * y;
      }
    }
    if (saa == 0.0 || sbb == 0.0) continue;
    total += sab / std::sqrt(saa * sbb);
    ++count;
  }
  if (count == 0) return std::nullopt;
  return total / count;
}

/// Harris response by direct 2-D convolution with a truncated Gaussian
/// (radius ceil(3 sigma)), clamped borders, central differences.
inline Image harris_oracle(const Image& img, double sigma, double k) {
  const int w = img.width();
  const int h = img.height();
  auto at = [&](int x, int y) {
    x = std::min(std::max(x, 0), w - 1);
    y = std::min(std::max(y, 0), h - 1);
    return static_cast<double>(img(x, y));
  };
  std::vector<double> gx(static_cast<std::size_t>(w * h)), gy(gx.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      gx[static_cast<std::size_t>(y * w + x)] = 0.5 * (at(x + 1, y) - at(x - 1, y));
      gy[static_cast<std::size_t>(y * w + x)] = 0.5 * (at(x, y + 1) - at(x, y - 1));
    }
  const int rad = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  double norm = 0.0;
  for (int v = -rad; v <= rad; ++v)
    for (int u = -rad; u <= rad; ++u) norm += std::exp(-0.5 * (u * u + v * v) / (sigma * sigma));
  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sxx = 0.0, syy = 0.0, sxy = 0.0;
      for (int v = -rad; v <= rad; ++v) {
        for (int u = -rad; u <= rad; ++u) {
          const int xx = std::min(std::max(x + u, 0), w - 1);
          const int yy = std::min(std::max(y + v, 0), h - 1);
          const double g = std::exp(-0.5 * (u * u + v * v) / (sigma * sigma)) / norm;
          const auto i = static_cast<std::size_t>(yy * w + xx);
          sxx += g * gx[i] * gx[i];
          syy += g * gy[i] * gy[i];
          sxy += g * gx[i] * gy[i];
        }
      }
      out(x, y) = static_cast<float>(sxx * syy - sxy * sxy - k * (sxx + syy) * (sxx + syy));
    }
  }
  return out;
}

}  // namespace multistitch::testing
