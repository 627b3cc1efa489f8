#include "multistitch/graph.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace multistitch {

namespace {

void check_bundle_weights(const EdgeBundle& b, double tol) {
  if (b.weights.size() != b.size()) {
    throw std::invalid_argument("bundle (" + std::to_string(b.i) + "," + std::to_string(b.j) +
                                ") has " + std::to_string(b.weights.size()) +
                                " weights, expected " + std::to_string(b.size()));
  }
  double sum = 0.0;
  for (double w : b.weights) {
    if (!std::isfinite(w)) throw std::invalid_argument("non-finite bundle weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > tol) {
    throw std::invalid_argument("bundle (" + std::to_string(b.i) + "," + std::to_string(b.j) +
                                ") weights sum to " + std::to_string(sum));
  }
}

void check_candidate(const CandidateTransform& c) {
  if (!c.delta.allFinite()) throw std::invalid_argument("non-finite candidate delta");
  if (!(c.score >= -1.0 && c.score <= 1.0)) {
    throw std::invalid_argument("candidate score outside [-1, 1]");
  }
  if (c.support < 1) throw std::invalid_argument("candidate support must be >= 1");
}

}  // namespace

AlignmentMultigraph::AlignmentMultigraph(double tau) { set_tau(tau); }

void AlignmentMultigraph::set_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be positive");
  tau_ = tau;
}

void AlignmentMultigraph::add_node(TileNode node) {
  if (node.id != static_cast<int>(nodes_.size())) {
    throw std::invalid_argument("node ids must be contiguous from 0");
  }
  if (!node.nominal_offset.allFinite()) throw std::invalid_argument("non-finite nominal offset");
  nodes_.push_back(std::move(node));
}

void AlignmentMultigraph::add_bundle(EdgeBundle bundle) {
  const int n = static_cast<int>(nodes_.size());
  if (bundle.i >= bundle.j) throw std::invalid_argument("bundle requires i < j");
  if (bundle.i < 0 || bundle.j >= n) throw std::invalid_argument("bundle references unknown node");
  if (find_bundle(bundle.i, bundle.j)) {
    throw std::invalid_argument("duplicate bundle for pair (" + std::to_string(bundle.i) + "," +
                                std::to_string(bundle.j) + ")");
  }
  if (bundle.candidates.empty()) throw std::invalid_argument("bundle without candidates");
  for (const auto& c : bundle.candidates) check_candidate(c);
  if (bundle.weights.empty()) {
    bundle.weights.assign(bundle.size(), 1.0 / static_cast<double>(bundle.size()));
  }
  check_bundle_weights(bundle, kWeightSumTolerance);

  weight_offsets_.push_back(num_weights());
  bundles_.push_back(std::move(bundle));
}

std::size_t AlignmentMultigraph::num_weights() const {
  if (bundles_.empty()) return 0;
  return weight_offsets_.back() + bundles_.back().size();
}

Eigen::VectorXd AlignmentMultigraph::flat_weights() const {
  Eigen::VectorXd w(static_cast<Eigen::Index>(num_weights()));
  for (std::size_t b = 0; b < bundles_.size(); ++b) {
    const auto& ws = bundles_[b].weights;
    for (std::size_t k = 0; k < ws.size(); ++k) {
      w[static_cast<Eigen::Index>(weight_offsets_[b] + k)] = ws[k];
    }
  }
  return w;
}

void AlignmentMultigraph::set_flat_weights(const Eigen::VectorXd& w) {
  if (static_cast<std::size_t>(w.size()) != num_weights()) {
    throw std::invalid_argument("weight vector size mismatch");
  }
  for (std::size_t b = 0; b < bundles_.size(); ++b) {
    auto& ws = bundles_[b].weights;
    for (std::size_t k = 0; k < ws.size(); ++k) {
      ws[k] = w[static_cast<Eigen::Index>(weight_offsets_[b] + k)];
    }
  }
}

std::optional<std::size_t> AlignmentMultigraph::find_bundle(int a, int b) const {
  if (a > b) std::swap(a, b);
  for (std::size_t k = 0; k < bundles_.size(); ++k) {
    if (bundles_[k].i == a && bundles_[k].j == b) return k;
  }
  return std::nullopt;
}

void AlignmentMultigraph::validate(double weight_tol) const {
  if (!(tau_ > 0.0)) throw std::invalid_argument("tau must be positive");
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    if (nodes_[k].id != static_cast<int>(k)) throw std::invalid_argument("non-contiguous node ids");
    if (!nodes_[k].nominal_offset.allFinite()) throw std::invalid_argument("non-finite offset");
  }
  for (const auto& b : bundles_) {
    if (b.i >= b.j || b.i < 0 || b.j >= static_cast<int>(nodes_.size())) {
      throw std::invalid_argument("bundle references invalid pair");
    }
    for (const auto& c : b.candidates) check_candidate(c);
    check_bundle_weights(b, weight_tol);
  }
}

Eigen::SparseMatrix<double> constraint_matrix(const AlignmentMultigraph& graph) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(graph.num_weights());
  for (std::size_t b = 0; b < graph.num_bundles(); ++b) {
    const std::size_t off = graph.weight_offset(b);
    for (std::size_t k = 0; k < graph.bundles()[b].size(); ++k) {
      triplets.emplace_back(static_cast<int>(b), static_cast<int>(off + k), 1.0);
    }
  }
  Eigen::SparseMatrix<double> J(static_cast<Eigen::Index>(graph.num_bundles()),
                                static_cast<Eigen::Index>(graph.num_weights()));
  J.setFromTriplets(triplets.begin(), triplets.end());
  return J;
}

Eigen::MatrixXd helmert_block(std::size_t m) {
  if (m < 2) throw std::invalid_argument("helmert block needs m >= 2");
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m),
                                            static_cast<Eigen::Index>(m - 1));
  for (std::size_t c = 1; c < m; ++c) {
    const double k = static_cast<double>(c);
    const double s = 1.0 / std::sqrt(k * (k + 1.0));
    for (std::size_t r = 0; r < c; ++r) {
      z(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - 1)) = s;
    }
    z(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c - 1)) = -k * s;
  }
  return z;
}

NullSpaceBasis::NullSpaceBasis(std::vector<std::size_t> block_sizes)
    : sizes_(std::move(block_sizes)) {
  row_offsets_.reserve(sizes_.size());
  col_offsets_.reserve(sizes_.size());
  block_index_.reserve(sizes_.size());
  std::vector<std::size_t> known_sizes;
  for (std::size_t m : sizes_) {
    if (m < 2) throw std::invalid_argument("bundle block must have at least 2 weights");
    row_offsets_.push_back(rows_);
    col_offsets_.push_back(cols_);
    rows_ += m;
    cols_ += m - 1;
    std::size_t idx = 0;
    while (idx < known_sizes.size() && known_sizes[idx] != m) ++idx;
    if (idx == known_sizes.size()) {
      known_sizes.push_back(m);
      blocks_.push_back(helmert_block(m));
    }
    block_index_.push_back(idx);
  }
}

const Eigen::MatrixXd& NullSpaceBasis::block(std::size_t b) const {
  return blocks_[block_index_[b]];
}

Eigen::VectorXd NullSpaceBasis::apply(const Eigen::VectorXd& a) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows_));
  for (std::size_t b = 0; b < sizes_.size(); ++b) {
    const auto m = static_cast<Eigen::Index>(sizes_[b]);
    out.segment(static_cast<Eigen::Index>(row_offsets_[b]), m) =
        block(b) * a.segment(static_cast<Eigen::Index>(col_offsets_[b]), m - 1);
  }
  return out;
}

Eigen::VectorXd NullSpaceBasis::apply_transpose(const Eigen::VectorXd& v) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(cols_));
  for (std::size_t b = 0; b < sizes_.size(); ++b) {
    const auto m = static_cast<Eigen::Index>(sizes_[b]);
    out.segment(static_cast<Eigen::Index>(col_offsets_[b]), m - 1) =
        block(b).transpose() * v.segment(static_cast<Eigen::Index>(row_offsets_[b]), m);
  }
  return out;
}

Eigen::VectorXd NullSpaceBasis::project(const Eigen::VectorXd& v) const {
  return apply(apply_transpose(v));
}

Eigen::SparseMatrix<double> NullSpaceBasis::to_sparse() const {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t b = 0; b < sizes_.size(); ++b) {
    const auto& z = block(b);
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
      for (Eigen::Index c = 0; c < z.cols(); ++c) {
        if (z(r, c) != 0.0) {
          triplets.emplace_back(static_cast<int>(row_offsets_[b] + static_cast<std::size_t>(r)),
                                static_cast<int>(col_offsets_[b] + static_cast<std::size_t>(c)),
                                z(r, c));
        }
      }
    }
  }
  Eigen::SparseMatrix<double> Z(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
  Z.setFromTriplets(triplets.begin(), triplets.end());
  return Z;
}

NullSpaceBasis nullspace_basis(const AlignmentMultigraph& graph) {
  std::vector<std::size_t> sizes;
  sizes.reserve(graph.num_bundles());
  for (const auto& b : graph.bundles()) sizes.push_back(b.size());
  return NullSpaceBasis(std::move(sizes));
}

}  // namespace multistitch
