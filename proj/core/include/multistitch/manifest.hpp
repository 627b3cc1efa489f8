#pragma once

#include "multistitch/graph.hpp"
#include "multistitch/image.hpp"

#include <string>
#include <vector>

namespace multistitch {

/// Tile list for registration:
/// {"tiles": [{"id", "path", "nominal_offset": [x, y]}], "min_overlap_px"}.
/// Relative paths resolve against the manifest's directory.
struct TileManifest {
  std::vector<TileNode> tiles;
  int min_overlap_px = 32;
  std::string base_dir;

  std::string resolve(const std::string& ref) const;
};

/// Throws IoError when unreadable, SchemaError on malformed content or
/// non-contiguous ids.
TileManifest load_manifest(const std::string& path);
void save_manifest(const TileManifest& manifest, const std::string& path);

/// Loads every tile image in id order. Throws IoError.
std::vector<Image> load_tile_images(const TileManifest& manifest);

}  // namespace multistitch
