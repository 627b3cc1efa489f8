#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace multistitch {

/// Undirected edge list over nodes 0..n-1.
using EdgeList = std::vector<std::pair<int, int>>;

/// Component label per node; components are numbered 0, 1, ... in order of
/// their smallest node id.
std::vector<int> component_labels(std::size_t num_nodes, const EdgeList& edges);

/// Nodes grouped by component, each group sorted, groups ordered by their
/// smallest node.
std::vector<std::vector<int>> components(std::size_t num_nodes, const EdgeList& edges);

/// True for every edge that lies on no cycle.
std::vector<bool> bridge_mask(std::size_t num_nodes, const EdgeList& edges);

/// One edge traversal of a cycle; `forward` means walking from
/// edges[edge].first to edges[edge].second.
struct CycleStep {
  std::size_t edge;
  bool forward;
};

/// A basis of the cycle space: one cycle per non-tree edge of a BFS
/// spanning forest.
std::vector<std::vector<CycleStep>> fundamental_cycles(std::size_t num_nodes, const EdgeList& edges);

}  // namespace multistitch
