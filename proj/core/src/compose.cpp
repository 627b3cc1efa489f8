#include "multistitch/compose.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace multistitch {

namespace {

// Offsets this close to an integer are treated as integral.
constexpr double kSnap = 1e-9;

double snap(double v) {
  const double r = std::round(v);
  return std::abs(v - r) < kSnap ? r : v;
}

}  // namespace

CompositeLayout make_layout(const std::vector<Vec2>& offsets, const std::vector<Image>& tiles,
                            BlendMode blend, int margin) {
  if (tiles.empty()) throw std::invalid_argument("nothing to render");
  if (offsets.size() != tiles.size())
    throw std::invalid_argument("need exactly one offset per tile");

  CompositeLayout layout;
  layout.blend = blend;
  layout.margin = margin;
  double x0 = std::numeric_limits<double>::infinity();
  double y0 = x0;
  double x1 = -x0;
  double y1 = -x0;
  int min_side = std::numeric_limits<int>::max();
  for (std::size_t k = 0; k < tiles.size(); ++k) {
    const Vec2 p(snap(offsets[k].x()), snap(offsets[k].y()));
    if (!p.allFinite()) throw std::invalid_argument("offset is not finite");
    x0 = std::min(x0, p.x());
    y0 = std::min(y0, p.y());
    x1 = std::max(x1, p.x() + tiles[k].width());
    y1 = std::max(y1, p.y() + tiles[k].height());
    min_side = std::min({min_side, tiles[k].width(), tiles[k].height()});
    layout.tile_width.push_back(tiles[k].width());
    layout.tile_height.push_back(tiles[k].height());
  }
  if (blend == BlendMode::Feather && (margin < 1 || margin > min_side / 2))
    throw std::invalid_argument("feather margin must lie in [1, tile side / 2]");

  layout.origin = Vec2(std::floor(x0), std::floor(y0));
  layout.width = static_cast<int>(std::ceil(x1) - layout.origin.x());
  layout.height = static_cast<int>(std::ceil(y1) - layout.origin.y());
  for (const auto& o : offsets) layout.placements.push_back(Vec2(snap(o.x()), snap(o.y())) - layout.origin);
  return layout;
}

Image render(const CompositeLayout& layout, const std::vector<Image>& tiles) {
  if (tiles.size() != layout.placements.size())
    throw std::invalid_argument("layout and tile count differ");
  Image out(layout.width, layout.height);
  out.set_max_value(tiles.front().max_value());
  const bool feather = layout.blend == BlendMode::Feather;
  std::vector<double> acc;
  std::vector<double> weight;
  if (feather) {
    acc.assign(static_cast<std::size_t>(layout.width) * static_cast<std::size_t>(layout.height), 0.0);
    weight.assign(acc.size(), 0.0);
  }

  for (std::size_t k = 0; k < tiles.size(); ++k) {
    const Image& tile = tiles[k];
    const Vec2 p = layout.placements[k];
    const double w_last = tile.width() - 1;
    const double h_last = tile.height() - 1;
    // Canvas pixels X whose tile coordinate X - p lies inside [0, size - 1].
    const int cx0 = std::max(0, static_cast<int>(std::ceil(p.x() - kSnap)));
    const int cy0 = std::max(0, static_cast<int>(std::ceil(p.y() - kSnap)));
    const int cx1 = std::min(layout.width - 1, static_cast<int>(std::floor(p.x() + w_last + kSnap)));
    const int cy1 = std::min(layout.height - 1, static_cast<int>(std::floor(p.y() + h_last + kSnap)));
    const bool integral = p.x() == std::round(p.x()) && p.y() == std::round(p.y());

    for (int y = cy0; y <= cy1; ++y) {
      const double v = std::clamp(y - p.y(), 0.0, h_last);
      for (int x = cx0; x <= cx1; ++x) {
        const double u = std::clamp(x - p.x(), 0.0, w_last);
        const double value = integral ? tile(static_cast<int>(u), static_cast<int>(v))
                                      : tile.sample_bilinear(u, v);
        if (!feather) {
          out(x, y) = static_cast<float>(value);
          continue;
        }
        const double edge = std::min({u, w_last - u, v, h_last - v});
        const double wgt = std::min(1.0, (edge + 1.0) / (layout.margin + 1.0));
        const auto idx = static_cast<std::size_t>(y) * static_cast<std::size_t>(layout.width) +
                         static_cast<std::size_t>(x);
        acc[idx] += wgt * value;
        weight[idx] += wgt;
      }
    }
  }
  if (feather) {
    auto pixels = out.pixels();
    for (std::size_t idx = 0; idx < acc.size(); ++idx)
      if (weight[idx] > 0.0) pixels[idx] = static_cast<float>(acc[idx] / weight[idx]);
  }
  return out;
}

}  // namespace multistitch
