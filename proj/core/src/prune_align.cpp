#include "multistitch/prune_align.hpp"

#include "multistitch/errors.hpp"
#include "multistitch/solver.hpp"
#include "multistitch/topology.hpp"

#include <Eigen/SparseCholesky>
#include <nlohmann/json.hpp>

#include <cmath>
#include <stdexcept>

namespace multistitch {

namespace {

EdgeList edge_list(const SimpleGraph& simple) {
  EdgeList edges;
  edges.reserve(simple.edges.size());
  for (const auto& e : simple.edges) edges.emplace_back(e.i, e.j);
  return edges;
}

}  // namespace

SimpleGraph prune(const AlignmentMultigraph& graph) {
  if (!graph.solved()) throw std::logic_error("prune requires solved weights");
  SimpleGraph out;
  out.nodes = graph.nodes();
  const auto selected = select_candidates(graph, graph.flat_weights());
  for (std::size_t b = 0; b < graph.num_bundles(); ++b) {
    const auto& bundle = graph.bundles()[b];
    const int k = selected[b];
    if (k == 0) {
      ++out.dropped;
      continue;
    }
    SimpleEdge e;
    e.i = bundle.i;
    e.j = bundle.j;
    e.delta = bundle.candidates[static_cast<std::size_t>(k - 1)].delta;
    e.weight = bundle.weights[static_cast<std::size_t>(k)];
    e.bundle = static_cast<int>(b);
    e.candidate = k;
    out.edges.push_back(e);
  }
  return out;
}

std::vector<Vec2> global_align(const SimpleGraph& simple) {
  const std::size_t n = simple.nodes.size();
  std::vector<Vec2> offsets(n);
  for (std::size_t v = 0; v < n; ++v) offsets[v] = simple.nodes[v].nominal_offset;
  if (simple.edges.empty()) return offsets;

  // Reference of each component: its smallest node.
  const auto labels = component_labels(n, edge_list(simple));
  std::vector<bool> pinned(n, false);
  std::vector<bool> seen(n, false);
  for (std::size_t v = 0; v < n; ++v) {
    const auto l = static_cast<std::size_t>(labels[v]);
    if (!seen[l]) {
      seen[l] = true;
      pinned[v] = true;
    }
  }
  std::vector<int> index(n, -1);
  int unknowns = 0;
  for (std::size_t v = 0; v < n; ++v) {
    if (!pinned[v]) index[v] = unknowns++;
  }
  if (unknowns == 0) return offsets;

  // Normal equations of the reduced system; the two axes decouple and share
  // the weighted Laplacian.
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(unknowns, 2);
  for (const auto& e : simple.edges) {
    const double s = e.weight * e.weight;
    const int a = index[static_cast<std::size_t>(e.i)];
    const int b = index[static_cast<std::size_t>(e.j)];
    // Residual delta + x_i - x_j: d/dx_i -> +, d/dx_j -> -.
    if (a >= 0) trip.emplace_back(a, a, s);
    if (b >= 0) trip.emplace_back(b, b, s);
    if (a >= 0 && b >= 0) {
      trip.emplace_back(a, b, -s);
      trip.emplace_back(b, a, -s);
    }
    Vec2 known = e.delta;
    if (a < 0) known += offsets[static_cast<std::size_t>(e.i)];
    if (b < 0) known -= offsets[static_cast<std::size_t>(e.j)];
    if (a >= 0) rhs.row(a) -= s * known.transpose();
    if (b >= 0) rhs.row(b) += s * known.transpose();
  }
  Eigen::SparseMatrix<double> normal(unknowns, unknowns);
  normal.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(normal);
  if (ldlt.info() != Eigen::Success) throw PipelineError("global alignment system is singular");
  const Eigen::MatrixXd x = ldlt.solve(rhs);
  for (std::size_t v = 0; v < n; ++v) {
    if (index[v] >= 0) offsets[v] = x.row(index[v]).transpose();
  }
  return offsets;
}

std::optional<double> rms_error(const SimpleGraph& simple, const std::vector<Vec2>& offsets) {
  if (simple.edges.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& e : simple.edges) {
    sum += (e.delta + offsets.at(static_cast<std::size_t>(e.i)) - offsets.at(static_cast<std::size_t>(e.j)))
               .squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(simple.edges.size()));
}

std::vector<std::vector<int>> connected_components(const SimpleGraph& simple) {
  return components(simple.nodes.size(), edge_list(simple));
}

Alignment align(const SimpleGraph& simple) {
  Alignment out;
  out.offsets = global_align(simple);
  out.rms = rms_error(simple, out.offsets);
  out.edges_retained = static_cast<int>(simple.edges.size());
  out.edges_dropped = simple.dropped;
  out.components = connected_components(simple);
  return out;
}

std::string alignment_to_json(const Alignment& alignment) {
  nlohmann::json doc;
  nlohmann::json offsets = nlohmann::json::array();
  for (const auto& o : alignment.offsets) offsets.push_back({o.x(), o.y()});
  doc["offsets"] = std::move(offsets);
  doc["rms"] = alignment.rms ? nlohmann::json(*alignment.rms) : nlohmann::json(nullptr);
  doc["edges_retained"] = alignment.edges_retained;
  doc["edges_dropped"] = alignment.edges_dropped;
  doc["components"] = alignment.components;
  return doc.dump(2);
}

std::vector<Vec2> offsets_from_alignment_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("malformed alignment JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("offsets") || !doc["offsets"].is_array()) {
    throw SchemaError("alignment JSON needs an 'offsets' array");
  }
  std::vector<Vec2> out;
  for (const auto& o : doc["offsets"]) {
    if (!o.is_array() || o.size() != 2 || !o[0].is_number() || !o[1].is_number()) {
      throw SchemaError("alignment offsets must be [x, y] pairs");
    }
    out.emplace_back(o[0].get<double>(), o[1].get<double>());
  }
  return out;
}

}  // namespace multistitch
