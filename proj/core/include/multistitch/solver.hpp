#pragma once

#include "multistitch/graph.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <optional>
#include <string>
#include <vector>

namespace multistitch {

enum class SolverMode { GradientDescent, LevenbergMarquardt };

std::optional<SolverMode> parse_solver_mode(const std::string& name);
std::string to_string(SolverMode mode);

struct SolverConfig {
  /// Overrides the graph's tau when set.
  std::optional<double> tau;
  int max_iterations = 500;
  double rel_tol = 1e-9;
  double lambda0 = 1e-2;
  double lambda_down = 0.5;
  double lambda_up = 4.0;
  double lambda_min = 1e-12;
  int lm_retries = 10;
  int cg_max_iters = 10;
  double cg_rel_residual = 0.1;
  /// Base step sizes of the projected gradient path; backtracking scales
  /// both by the same power of two.
  double gd_gamma_h = 0.1;
  double gd_gamma_w = 0.01;
  int gd_max_halvings = 40;
  SolverMode mode = SolverMode::LevenbergMarquardt;
  /// Finish with the exact weight minimizer for the final offsets.
  bool balance_weights = true;

  /// Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
};

/// Offsets `h` hold two entries per node (x then y); `w` is bundle-major
/// with the dummy first.
struct SolverState {
  Eigen::VectorXd h;
  Eigen::VectorXd w;
  double lambda = 1e-2;
  int iteration = 0;
  double loss = 0.0;
  /// Backtracking scale carried between projected gradient steps.
  double gd_scale = 1.0;
};

struct Gradient {
  Eigen::VectorXd h;
  Eigen::VectorXd w;
};

/// Reduced damped Newton system over (free offsets, null-space coordinates).
struct ReducedSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
};

/// delta_k + h_i - h_j for candidate k (1-based) of bundle b.
Vec2 residual(const AlignmentMultigraph& graph, const Eigen::VectorXd& h, std::size_t b, std::size_t k);

/// Sum over bundles of w0^2 tau^2 + sum_k w_k^2 |residual_k|^2.
double loss(const AlignmentMultigraph& graph, const Eigen::VectorXd& h, const Eigen::VectorXd& w,
            double tau);

/// Per-node gauge pin: the smallest node id of every connected component
/// (isolated nodes included) stays at its nominal offset.
std::vector<bool> gauge_pins(const AlignmentMultigraph& graph);

/// Loss, derivatives and constraint geometry for one graph and tau.
class AlignmentProblem {
 public:
  AlignmentProblem(const AlignmentMultigraph& graph, double tau);

  const AlignmentMultigraph& graph() const { return *graph_; }
  double tau() const { return tau_; }
  const NullSpaceBasis& basis() const { return basis_; }
  const std::vector<bool>& pinned() const { return pinned_; }

  /// Number of free offset coordinates (2 per unpinned node).
  Eigen::Index num_free_offsets() const { return num_free_; }
  /// Position of offset coordinate (node, axis) among the free ones, or -1.
  Eigen::Index free_index(std::size_t node, int axis) const {
    return free_index_[2 * node + static_cast<std::size_t>(axis)];
  }
  /// Scatters free-coordinate values into a full offset vector (pinned = 0).
  Eigen::VectorXd expand_offsets(const Eigen::VectorXd& free) const;

  double loss(const Eigen::VectorXd& h, const Eigen::VectorXd& w) const;
  /// Analytic gradient; entries of pinned nodes are zero.
  Gradient gradient(const Eigen::VectorXd& h, const Eigen::VectorXd& w) const;
  /// [[H_hh, H_hw Z], [Z^T H_wh, Z^T H_ww Z]] + lambda I and its right-hand
  /// side [-grad_h; -Z^T grad_w], restricted to free offsets.
  ReducedSystem hessian_system(const Eigen::VectorXd& h, const Eigen::VectorXd& w, double lambda) const;

  /// Exact minimizer of the loss over w for fixed h: inside each bundle the
  /// weights are proportional to 1/cost with cost tau^2 for the dummy and
  /// |residual|^2 for candidates.
  Eigen::VectorXd balanced_weights(const Eigen::VectorXd& h) const;

  /// Initial offsets (nominal) and uniform weights.
  SolverState initial_state(double lambda0) const;

  /// max_r |(J w)_r - 1|
  double constraint_violation(const Eigen::VectorXd& w) const;

 private:
  const AlignmentMultigraph* graph_;
  double tau_;
  NullSpaceBasis basis_;
  std::vector<bool> pinned_;
  std::vector<Eigen::Index> free_index_;
  Eigen::Index num_free_ = 0;
};

enum class StepStatus { Accepted, Stalled };

struct StepResult {
  SolverState state;
  StepStatus status = StepStatus::Stalled;
  /// True when the LM path gave up and used a projected gradient step.
  bool used_fallback = false;
  /// Damping values tried, in order (LM path only).
  std::vector<double> lambdas_tried;
};

/// h <- h - s gamma_h grad_h, w <- w - s gamma_w Z Z^T grad_w, halving s
/// until the loss decreases. Stalled (state unchanged) when s underflows.
StepResult projected_gd_step(const AlignmentProblem& problem, const SolverState& state,
                             double gamma_h, double gamma_w, int max_halvings = 40);

struct CgResult {
  Eigen::VectorXd x;
  int iterations = 0;
  bool non_positive_curvature = false;
  double relative_residual = 1.0;
};

/// Jacobi-preconditioned conjugate gradient from x = 0, stopped after
/// `max_iters` iterations, at `rel_residual`, or on non-positive curvature.
CgResult jacobi_pcg(const Eigen::SparseMatrix<double>& matrix, const Eigen::VectorXd& rhs,
                    int max_iters, double rel_residual);

/// One damped Newton step with the weight update confined to null(J).
StepResult lm_step(const AlignmentProblem& problem, const SolverState& state, const SolverConfig& config);

struct SolveReport {
  Eigen::VectorXd h;
  Eigen::VectorXd w;
  double loss = 0.0;
  int iterations = 0;
  std::vector<double> loss_curve;
  std::vector<double> lambda_history;
  /// Per-bundle argmax weight index, 0 = dummy. Ties go to the dummy, then
  /// to the lowest candidate index.
  std::vector<int> selected;
  /// Bundles whose tile pair lies on no cycle of the bundle graph.
  std::vector<std::size_t> acyclic_bundles;
  /// Largest constraint violation seen over all accepted iterates.
  double max_constraint_violation = 0.0;
  int fallback_steps = 0;
  bool converged = false;

  Vec2 offset(std::size_t node) const { return h.segment<2>(static_cast<Eigen::Index>(2 * node)); }
};

/// Argmax per bundle with the tie rule of SolveReport::selected.
std::vector<int> select_candidates(const AlignmentMultigraph& graph, const Eigen::VectorXd& w);

SolveReport solve(const AlignmentMultigraph& graph, const SolverConfig& config = {});

/// Copies solved weights and offsets into the graph and marks it solved.
void apply_solution(AlignmentMultigraph& graph, const SolveReport& report);

/// The SolveReport JSON document.
std::string report_to_json(const AlignmentMultigraph& graph, const SolveReport& report);

}  // namespace multistitch
