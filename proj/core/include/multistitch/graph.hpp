#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace multistitch {

using Vec2 = Eigen::Vector2d;

/// Weight-sum tolerance for in-memory graphs.
inline constexpr double kWeightSumTolerance = 1e-9;
/// Weight-sum tolerance accepted when reading JSON (text round-off).
inline constexpr double kWeightSumToleranceText = 1e-6;

/// One tile. Offsets are tile positions in composite pixels, x right, y down.
struct TileNode {
  int id = 0;
  std::string image_ref;
  Vec2 nominal_offset = Vec2::Zero();
  std::optional<Vec2> solved_offset;
};

/// One translation hypothesis between tiles i and j of a bundle.
///
/// `delta` is the position of tile j relative to tile i, so a candidate is
/// exactly satisfied when offset_j - offset_i == delta.
struct CandidateTransform {
  Vec2 delta = Vec2::Zero();
  double score = 0.0;
  int support = 1;
};

/// All candidates between one tile pair. `weights[0]` is the dummy weight,
/// `weights[k]` belongs to `candidates[k - 1]`.
struct EdgeBundle {
  int i = 0;
  int j = 0;
  std::vector<CandidateTransform> candidates;
  std::vector<double> weights;

  std::size_t size() const { return candidates.size() + 1; }
};

/// Tile multigraph consumed by the constrained solver.
class AlignmentMultigraph {
 public:
  AlignmentMultigraph() = default;
  explicit AlignmentMultigraph(double tau);

  double tau() const { return tau_; }
  void set_tau(double tau);

  /// Appends a node; its id must equal the current node count.
  void add_node(TileNode node);

  /// Appends a bundle. Empty weights become uniform 1/(N_e+1).
  /// Throws std::invalid_argument on i >= j, unknown nodes, duplicate pairs,
  /// empty candidate lists or invalid weights.
  void add_bundle(EdgeBundle bundle);

  const std::vector<TileNode>& nodes() const { return nodes_; }
  std::vector<TileNode>& nodes() { return nodes_; }
  const std::vector<EdgeBundle>& bundles() const { return bundles_; }

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_bundles() const { return bundles_.size(); }

  /// Total number of weights, dummies included.
  std::size_t num_weights() const;
  /// Index of bundle b's dummy weight in the flat weight vector.
  std::size_t weight_offset(std::size_t b) const { return weight_offsets_.at(b); }

  /// Flat weights ordered bundle-major, dummy first.
  Eigen::VectorXd flat_weights() const;
  /// Replaces all weights. The vector must satisfy the sum constraint.
  void set_flat_weights(const Eigen::VectorXd& w);

  /// Bundle index for the unordered pair, if present.
  std::optional<std::size_t> find_bundle(int a, int b) const;

  /// True once weights came out of the solver (or were supplied as such).
  bool solved() const { return solved_; }
  void mark_solved(bool value = true) { solved_ = value; }

  /// Throws std::invalid_argument if an invariant is broken.
  void validate(double weight_tol = kWeightSumTolerance) const;

 private:
  double tau_ = 5.0;
  bool solved_ = false;
  std::vector<TileNode> nodes_;
  std::vector<EdgeBundle> bundles_;
  std::vector<std::size_t> weight_offsets_;
};

/// Row r has ones exactly at the weight indices of bundle r.
Eigen::SparseMatrix<double> constraint_matrix(const AlignmentMultigraph& graph);

/// Orthonormal basis of the hyperplane orthogonal to the ones vector in R^m,
/// as an m x (m-1) matrix (Helmert construction).
Eigen::MatrixXd helmert_block(std::size_t m);

/// Block-diagonal null-space basis of the constraint matrix.
///
/// Only the block sizes are stored; products with Z and Z^T are applied
/// block by block.
class NullSpaceBasis {
 public:
  NullSpaceBasis() = default;
  explicit NullSpaceBasis(std::vector<std::size_t> block_sizes);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t num_blocks() const { return sizes_.size(); }
  std::size_t block_size(std::size_t b) const { return sizes_[b]; }
  std::size_t row_offset(std::size_t b) const { return row_offsets_[b]; }
  std::size_t col_offset(std::size_t b) const { return col_offsets_[b]; }
  const Eigen::MatrixXd& block(std::size_t b) const;

  /// Z * a
  Eigen::VectorXd apply(const Eigen::VectorXd& a) const;
  /// Z^T * v
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& v) const;
  /// Z Z^T v, the projection onto null(J).
  Eigen::VectorXd project(const Eigen::VectorXd& v) const;

  Eigen::SparseMatrix<double> to_sparse() const;

 private:
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> row_offsets_;
  std::vector<std::size_t> col_offsets_;
  std::vector<Eigen::MatrixXd> blocks_;  // shared per distinct size
  std::vector<std::size_t> block_index_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
};

NullSpaceBasis nullspace_basis(const AlignmentMultigraph& graph);

/// Serializes to the graph JSON document (pretty-printed).
std::string serialize(const AlignmentMultigraph& graph);

/// Parses a graph JSON document. Throws SchemaError on malformed input,
/// schema violations or weight sums off by more than 1e-6. Unknown fields
/// are ignored.
AlignmentMultigraph deserialize(const std::string& text);

AlignmentMultigraph load_graph(const std::string& path);
void save_graph(const AlignmentMultigraph& graph, const std::string& path);

}  // namespace multistitch
