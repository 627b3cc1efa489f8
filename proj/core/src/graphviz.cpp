#include "multistitch/graphviz.hpp"

#include "multistitch/prune_align.hpp"

#include <cstdio>
#include <sstream>

namespace multistitch {

namespace {

std::string edge_line(int i, int j, double weight, bool dashed) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "  %d -- %d [%slabel=\"%.3f\"];\n", i, j,
                dashed ? "style=dashed, " : "", weight);
  return buf;
}

}  // namespace

std::string to_dot(const AlignmentMultigraph& graph, bool pruned) {
  std::ostringstream dot;
  dot << "graph multigraph {\n  node [shape=circle];\n";
  for (const auto& n : graph.nodes()) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "  %d [pos=\"%.6g,%.6g!\"];\n", n.id, n.nominal_offset.x(),
                  -n.nominal_offset.y() + 0.0);
    dot << buf;
  }
  if (pruned) {
    const SimpleGraph simple = prune(graph);
    for (const auto& e : simple.edges) {
      dot << edge_line(e.i, e.j, e.weight, false);
    }
  } else {
    for (const auto& b : graph.bundles()) {
      for (std::size_t k = 1; k < b.size(); ++k)
        dot << edge_line(b.i, b.j, b.weights[k], false);
      dot << edge_line(b.i, b.j, b.weights[0], true);
    }
  }
  dot << "}\n";
  return dot.str();
}

}  // namespace multistitch
