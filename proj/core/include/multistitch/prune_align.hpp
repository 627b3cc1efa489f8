#pragma once

#include "multistitch/graph.hpp"

#include <optional>
#include <string>
#include <vector>

namespace multistitch {

struct SimpleEdge {
  int i = 0;
  int j = 0;
  Vec2 delta = Vec2::Zero();
  double weight = 1.0;
  /// Index into the source multigraph's bundles, or -1.
  int bundle = -1;
  /// Winning candidate (1-based), or -1 when not taken from a bundle.
  int candidate = -1;
};

struct SimpleGraph {
  std::vector<TileNode> nodes;
  std::vector<SimpleEdge> edges;
  /// Bundles of the source multigraph whose dummy won.
  int dropped = 0;
};

/// Keeps the largest-weight hypothesis of every bundle; bundles won by the
/// dummy are dropped. Ties go to the dummy, then to the lowest candidate.
/// Throws std::logic_error when the graph carries unsolved weights.
SimpleGraph prune(const AlignmentMultigraph& graph);

/// Node offsets minimizing sum w_ij^2 |delta_ij + x_i - x_j|^2, with the
/// smallest node of every component fixed at its nominal offset.
std::vector<Vec2> global_align(const SimpleGraph& simple);

/// sqrt(mean |delta_ij + x_i - x_j|^2) over edges; nothing for no edges.
std::optional<double> rms_error(const SimpleGraph& simple, const std::vector<Vec2>& offsets);

std::vector<std::vector<int>> connected_components(const SimpleGraph& simple);

struct Alignment {
  std::vector<Vec2> offsets;
  std::optional<double> rms;
  int edges_retained = 0;
  int edges_dropped = 0;
  std::vector<std::vector<int>> components;
};

/// global_align + rms_error + connected_components.
Alignment align(const SimpleGraph& simple);

/// The alignment JSON document (`rms` is null without edges).
std::string alignment_to_json(const Alignment& alignment);
/// Parses the offsets of an alignment JSON document. Throws SchemaError.
std::vector<Vec2> offsets_from_alignment_json(const std::string& text);

}  // namespace multistitch
