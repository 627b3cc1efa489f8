#include "multistitch/manifest.hpp"

#include "multistitch/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace multistitch {

namespace fs = std::filesystem;
using nlohmann::json;

std::string TileManifest::resolve(const std::string& ref) const {
  const fs::path p(ref);
  if (p.is_absolute() || base_dir.empty()) return p.string();
  return (fs::path(base_dir) / p).string();
}

TileManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read manifest " + path);
  std::stringstream buf;
  buf << in.rdbuf();

  TileManifest out;
  out.base_dir = fs::path(path).parent_path().string();
  try {
    const json doc = json::parse(buf.str());
    if (!doc.is_object() || !doc.contains("tiles") || !doc["tiles"].is_array())
      throw SchemaError("manifest needs a \"tiles\" array");
    if (doc.contains("min_overlap_px")) out.min_overlap_px = doc["min_overlap_px"].get<int>();
    for (const auto& t : doc["tiles"]) {
      TileNode node;
      node.id = t.at("id").get<int>();
      node.image_ref = t.at("path").get<std::string>();
      const auto& off = t.at("nominal_offset");
      if (!off.is_array() || off.size() != 2) throw SchemaError("nominal_offset must be [x, y]");
      node.nominal_offset = Vec2(off[0].get<double>(), off[1].get<double>());
      out.tiles.push_back(std::move(node));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed manifest: ") + e.what());
  }
  std::sort(out.tiles.begin(), out.tiles.end(),
            [](const TileNode& a, const TileNode& b) { return a.id < b.id; });
  for (std::size_t k = 0; k < out.tiles.size(); ++k) {
    if (out.tiles[k].id != static_cast<int>(k))
      throw SchemaError("manifest tile ids must be 0..n-1");
  }
  if (out.min_overlap_px < 1) throw SchemaError("min_overlap_px must be positive");
  return out;
}

void save_manifest(const TileManifest& manifest, const std::string& path) {
  json tiles = json::array();
  for (const auto& t : manifest.tiles) {
    tiles.push_back({{"id", t.id},
                     {"path", t.image_ref},
                     {"nominal_offset", {t.nominal_offset.x(), t.nominal_offset.y()}}});
  }
  const json doc = {{"tiles", tiles}, {"min_overlap_px", manifest.min_overlap_px}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

std::vector<Image> load_tile_images(const TileManifest& manifest) {
  std::vector<Image> images;
  images.reserve(manifest.tiles.size());
  for (const auto& t : manifest.tiles) images.push_back(load_image(manifest.resolve(t.image_ref)));
  return images;
}

}  // namespace multistitch
