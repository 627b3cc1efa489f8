#pragma once

#include "multistitch/graph.hpp"
#include "multistitch/image.hpp"

#include <vector>

namespace multistitch {

enum class BlendMode { Overwrite, Feather };

struct CompositeLayout {
  int width = 0;
  int height = 0;
  /// Composite coordinates of canvas pixel (0, 0).
  Vec2 origin = Vec2::Zero();
  /// Tile positions relative to the canvas.
  std::vector<Vec2> placements;
  std::vector<int> tile_width;
  std::vector<int> tile_height;
  BlendMode blend = BlendMode::Overwrite;
  /// Feather ramp width in pixels.
  int margin = 16;
};

/// Canvas = bounding box of the placed tiles, snapped outwards to whole
/// pixels. Throws std::invalid_argument on size mismatches, no tiles, or a
/// feather margin outside [1, half the smallest tile side].
CompositeLayout make_layout(const std::vector<Vec2>& offsets, const std::vector<Image>& tiles,
                            BlendMode blend = BlendMode::Overwrite, int margin = 16);

/// Places every tile with bilinear resampling. Overwrite paints tiles in id
/// order; feather averages with weights ramping up over `margin` pixels
/// from each tile border. Uncovered pixels are 0.
Image render(const CompositeLayout& layout, const std::vector<Image>& tiles);

}  // namespace multistitch
