#include "multistitch/topology.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace multistitch {

namespace {

struct Adjacent {
  int node;
  std::size_t edge;
};

std::vector<std::vector<Adjacent>> adjacency(std::size_t n, const EdgeList& edges) {
  std::vector<std::vector<Adjacent>> adj(n);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [a, b] = edges[e];
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= n || static_cast<std::size_t>(b) >= n) {
      throw std::invalid_argument("edge references unknown node");
    }
    adj[static_cast<std::size_t>(a)].push_back({b, e});
    adj[static_cast<std::size_t>(b)].push_back({a, e});
  }
  return adj;
}

int find_root(std::vector<int>& parent, int x) {
  while (parent[static_cast<std::size_t>(x)] != x) {
    parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    x = parent[static_cast<std::size_t>(x)];
  }
  return x;
}

}  // namespace

std::vector<int> component_labels(std::size_t num_nodes, const EdgeList& edges) {
  std::vector<int> parent(num_nodes);
  std::iota(parent.begin(), parent.end(), 0);
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= num_nodes ||
        static_cast<std::size_t>(b) >= num_nodes) {
      throw std::invalid_argument("edge references unknown node");
    }
    const int ra = find_root(parent, a);
    const int rb = find_root(parent, b);
    if (ra != rb) parent[static_cast<std::size_t>(std::max(ra, rb))] = std::min(ra, rb);
  }
  std::vector<int> labels(num_nodes);
  std::vector<int> root_label(num_nodes, -1);
  int next = 0;
  for (std::size_t v = 0; v < num_nodes; ++v) {
    const auto r = static_cast<std::size_t>(find_root(parent, static_cast<int>(v)));
    if (root_label[r] < 0) root_label[r] = next++;
    labels[v] = root_label[r];
  }
  return labels;
}

std::vector<std::vector<int>> components(std::size_t num_nodes, const EdgeList& edges) {
  const auto labels = component_labels(num_nodes, edges);
  const int count = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::vector<int>> out(static_cast<std::size_t>(count));
  for (std::size_t v = 0; v < num_nodes; ++v) out[static_cast<std::size_t>(labels[v])].push_back(static_cast<int>(v));
  return out;
}

std::vector<bool> bridge_mask(std::size_t num_nodes, const EdgeList& edges) {
  const auto adj = adjacency(num_nodes, edges);
  std::vector<bool> bridge(edges.size(), false);
  std::vector<int> disc(num_nodes, -1);
  std::vector<int> low(num_nodes, 0);
  int timer = 0;

  // Iterative DFS; parallel edges are distinguished by edge index.
  struct Frame {
    int node;
    std::size_t via_edge;
    std::size_t next;
  };
  for (std::size_t root = 0; root < num_nodes; ++root) {
    if (disc[root] >= 0) continue;
    std::vector<Frame> stack{{static_cast<int>(root), edges.size(), 0}};
    disc[root] = low[root] = timer++;
    while (!stack.empty()) {
      Frame& f = stack.back();
      const auto u = static_cast<std::size_t>(f.node);
      if (f.next < adj[u].size()) {
        const Adjacent nb = adj[u][f.next++];
        if (nb.edge == f.via_edge) continue;
        const auto v = static_cast<std::size_t>(nb.node);
        if (disc[v] < 0) {
          disc[v] = low[v] = timer++;
          stack.push_back({nb.node, nb.edge, 0});
        } else {
          low[u] = std::min(low[u], disc[v]);
        }
      } else {
        const std::size_t via = f.via_edge;
        stack.pop_back();
        if (!stack.empty()) {
          const auto p = static_cast<std::size_t>(stack.back().node);
          low[p] = std::min(low[p], low[u]);
          if (low[u] > disc[p]) bridge[via] = true;
        }
      }
    }
  }
  return bridge;
}

std::vector<std::vector<CycleStep>> fundamental_cycles(std::size_t num_nodes, const EdgeList& edges) {
  const auto adj = adjacency(num_nodes, edges);
  std::vector<int> parent(num_nodes, -1);
  std::vector<std::size_t> parent_edge(num_nodes, edges.size());
  std::vector<int> depth(num_nodes, -1);
  std::vector<bool> tree_edge(edges.size(), false);

  for (std::size_t root = 0; root < num_nodes; ++root) {
    if (depth[root] >= 0) continue;
    depth[root] = 0;
    std::queue<int> queue;
    queue.push(static_cast<int>(root));
    while (!queue.empty()) {
      const auto u = static_cast<std::size_t>(queue.front());
      queue.pop();
      for (const auto& nb : adj[u]) {
        const auto v = static_cast<std::size_t>(nb.node);
        if (depth[v] >= 0) continue;
        depth[v] = depth[u] + 1;
        parent[v] = static_cast<int>(u);
        parent_edge[v] = nb.edge;
        tree_edge[nb.edge] = true;
        queue.push(nb.node);
      }
    }
  }

  // Step from child c up to its parent along the tree edge.
  auto up_step = [&](int c) {
    const std::size_t e = parent_edge[static_cast<std::size_t>(c)];
    return CycleStep{e, edges[e].first == c};
  };

  std::vector<std::vector<CycleStep>> cycles;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (tree_edge[e]) continue;
    const auto [a, b] = edges[e];
    // Cycle: a -> b along e, then b up to the common ancestor, then down to a.
    std::vector<CycleStep> from_b;
    std::vector<CycleStep> from_a;
    int x = b;
    int y = a;
    while (depth[static_cast<std::size_t>(x)] > depth[static_cast<std::size_t>(y)]) {
      from_b.push_back(up_step(x));
      x = parent[static_cast<std::size_t>(x)];
    }
    while (depth[static_cast<std::size_t>(y)] > depth[static_cast<std::size_t>(x)]) {
      from_a.push_back(up_step(y));
      y = parent[static_cast<std::size_t>(y)];
    }
    while (x != y) {
      from_b.push_back(up_step(x));
      from_a.push_back(up_step(y));
      x = parent[static_cast<std::size_t>(x)];
      y = parent[static_cast<std::size_t>(y)];
    }
    std::vector<CycleStep> cycle{{e, true}};
    cycle.insert(cycle.end(), from_b.begin(), from_b.end());
    // The a-side path is walked downwards, i.e. reversed.
    for (auto it = from_a.rbegin(); it != from_a.rend(); ++it) cycle.push_back({it->edge, !it->forward});
    cycles.push_back(std::move(cycle));
  }
  return cycles;
}

}  // namespace multistitch
