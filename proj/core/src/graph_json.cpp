#include "multistitch/errors.hpp"
#include "multistitch/graph.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace multistitch {

using nlohmann::json;

namespace {

Vec2 read_vec2(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw SchemaError(std::string(what) + " must be a [x, y] number pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

template <typename T>
T require(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw SchemaError(std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

std::string serialize(const AlignmentMultigraph& graph) {
  json doc;
  doc["tau"] = graph.tau();
  if (graph.solved()) doc["solved"] = true;
  json nodes = json::array();
  for (const auto& n : graph.nodes()) {
    json node{{"id", n.id},
              {"image", n.image_ref},
              {"nominal_offset", {n.nominal_offset.x(), n.nominal_offset.y()}}};
    if (n.solved_offset) node["solved_offset"] = {n.solved_offset->x(), n.solved_offset->y()};
    nodes.push_back(std::move(node));
  }
  doc["nodes"] = std::move(nodes);
  json bundles = json::array();
  for (const auto& b : graph.bundles()) {
    json cands = json::array();
    for (const auto& c : b.candidates) {
      cands.push_back(
          {{"dx", c.delta.x()}, {"dy", c.delta.y()}, {"score", c.score}, {"support", c.support}});
    }
    bundles.push_back({{"i", b.i}, {"j", b.j}, {"candidates", cands}, {"weights", b.weights}});
  }
  doc["bundles"] = std::move(bundles);
  return doc.dump(2);
}

AlignmentMultigraph deserialize(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("malformed graph JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("graph JSON must be an object");

  const double tau = require<double>(doc, "tau");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw SchemaError("tau must be positive");
  AlignmentMultigraph graph(tau);

  const json nodes = require<json>(doc, "nodes");
  if (!nodes.is_array()) throw SchemaError("'nodes' must be an array");
  std::vector<TileNode> parsed;
  for (const auto& n : nodes) {
    if (!n.is_object()) throw SchemaError("node entries must be objects");
    TileNode node;
    node.id = require<int>(n, "id");
    node.image_ref = n.contains("image") ? require<std::string>(n, "image") : std::string{};
    node.nominal_offset = read_vec2(require<json>(n, "nominal_offset"), "nominal_offset");
    if (n.contains("solved_offset")) node.solved_offset = read_vec2(n["solved_offset"], "solved_offset");
    parsed.push_back(std::move(node));
  }
  std::sort(parsed.begin(), parsed.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  try {
    for (auto& n : parsed) graph.add_node(std::move(n));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }

  const json bundles = require<json>(doc, "bundles");
  if (!bundles.is_array()) throw SchemaError("'bundles' must be an array");
  for (const auto& b : bundles) {
    if (!b.is_object()) throw SchemaError("bundle entries must be objects");
    EdgeBundle bundle;
    bundle.i = require<int>(b, "i");
    bundle.j = require<int>(b, "j");
    const json cands = require<json>(b, "candidates");
    if (!cands.is_array()) throw SchemaError("'candidates' must be an array");
    for (const auto& c : cands) {
      CandidateTransform ct;
      ct.delta = {require<double>(c, "dx"), require<double>(c, "dy")};
      ct.score = require<double>(c, "score");
      ct.support = require<int>(c, "support");
      bundle.candidates.push_back(ct);
    }
    if (b.contains("weights")) {
      bundle.weights = require<std::vector<double>>(b, "weights");
      if (bundle.weights.size() != bundle.size()) {
        throw SchemaError("bundle weights must have one entry per candidate plus the dummy");
      }
      double sum = 0.0;
      for (double w : bundle.weights) sum += w;
      if (!std::isfinite(sum) || std::abs(sum - 1.0) > kWeightSumToleranceText) {
        throw SchemaError("bundle (" + std::to_string(bundle.i) + "," + std::to_string(bundle.j) +
                          ") weights sum to " + std::to_string(sum) + ", expected 1");
      }
      if (std::abs(sum - 1.0) > kWeightSumTolerance) {
        for (double& w : bundle.weights) w /= sum;
      }
    }
    try {
      graph.add_bundle(std::move(bundle));
    } catch (const std::invalid_argument& e) {
      throw SchemaError(e.what());
    }
  }
  if (doc.value("solved", false)) graph.mark_solved();
  return graph;
}

AlignmentMultigraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open graph file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str());
}

void save_graph(const AlignmentMultigraph& graph, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write graph file '" + path + "'");
  out << serialize(graph) << '\n';
  if (!out) throw IoError("failed writing graph file '" + path + "'");
}

}  // namespace multistitch
