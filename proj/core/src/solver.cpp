#include "multistitch/solver.hpp"

#include "multistitch/topology.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace multistitch {

std::optional<SolverMode> parse_solver_mode(const std::string& name) {
  if (name == "lm" || name == "levenberg_marquardt") return SolverMode::LevenbergMarquardt;
  if (name == "gd" || name == "gradient_descent") return SolverMode::GradientDescent;
  return std::nullopt;
}

std::string to_string(SolverMode mode) {
  return mode == SolverMode::LevenbergMarquardt ? "levenberg_marquardt" : "gradient_descent";
}

void SolverConfig::validate() const {
  if (tau && !(*tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (max_iterations < 0) throw std::invalid_argument("max_iterations must be >= 0");
  if (!(lambda0 > 0.0)) throw std::invalid_argument("lambda0 must be positive");
  if (!(lambda_down < 1.0 && lambda_down > 0.0 && lambda_up > 1.0)) {
    throw std::invalid_argument("lambda schedule requires 0 < lambda_down < 1 < lambda_up");
  }
  if (cg_max_iters < 1) throw std::invalid_argument("cg_max_iters must be >= 1");
  if (lm_retries < 1) throw std::invalid_argument("lm_retries must be >= 1");
  if (!(gd_gamma_h > 0.0 && gd_gamma_w > 0.0)) throw std::invalid_argument("step sizes must be positive");
}

Vec2 residual(const AlignmentMultigraph& graph, const Eigen::VectorXd& h, std::size_t b, std::size_t k) {
  const auto& bundle = graph.bundles().at(b);
  if (k < 1 || k > bundle.candidates.size()) throw std::out_of_range("candidate index");
  const auto i = static_cast<Eigen::Index>(2 * bundle.i);
  const auto j = static_cast<Eigen::Index>(2 * bundle.j);
  return bundle.candidates[k - 1].delta + h.segment<2>(i) - h.segment<2>(j);
}

double loss(const AlignmentMultigraph& graph, const Eigen::VectorXd& h, const Eigen::VectorXd& w,
            double tau) {
  const double tau2 = tau * tau;
  double f = 0.0;
  for (std::size_t b = 0; b < graph.num_bundles(); ++b) {
    const auto& bundle = graph.bundles()[b];
    const auto off = static_cast<Eigen::Index>(graph.weight_offset(b));
    f += w[off] * w[off] * tau2;
    for (std::size_t k = 1; k <= bundle.candidates.size(); ++k) {
      const double wk = w[off + static_cast<Eigen::Index>(k)];
      f += wk * wk * residual(graph, h, b, k).squaredNorm();
    }
  }
  return f;
}

std::vector<bool> gauge_pins(const AlignmentMultigraph& graph) {
  EdgeList edges;
  for (const auto& b : graph.bundles()) edges.emplace_back(b.i, b.j);
  std::vector<bool> pinned(graph.num_nodes(), false);
  for (const auto& comp : components(graph.num_nodes(), edges)) {
    pinned[static_cast<std::size_t>(comp.front())] = true;
  }
  return pinned;
}

AlignmentProblem::AlignmentProblem(const AlignmentMultigraph& graph, double tau)
    : graph_(&graph), tau_(tau), basis_(nullspace_basis(graph)), pinned_(gauge_pins(graph)) {
  free_index_.assign(2 * graph.num_nodes(), -1);
  for (std::size_t n = 0; n < graph.num_nodes(); ++n) {
    if (pinned_[n]) continue;
    free_index_[2 * n] = num_free_++;
    free_index_[2 * n + 1] = num_free_++;
  }
}

Eigen::VectorXd AlignmentProblem::expand_offsets(const Eigen::VectorXd& free) const {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(2 * graph_->num_nodes()));
  for (std::size_t k = 0; k < free_index_.size(); ++k) {
    if (free_index_[k] >= 0) full[static_cast<Eigen::Index>(k)] = free[free_index_[k]];
  }
  return full;
}

double AlignmentProblem::loss(const Eigen::VectorXd& h, const Eigen::VectorXd& w) const {
  return multistitch::loss(*graph_, h, w, tau_);
}

Gradient AlignmentProblem::gradient(const Eigen::VectorXd& h, const Eigen::VectorXd& w) const {
  Gradient g{Eigen::VectorXd::Zero(h.size()), Eigen::VectorXd::Zero(w.size())};
  const double tau2 = tau_ * tau_;
  for (std::size_t b = 0; b < graph_->num_bundles(); ++b) {
    const auto& bundle = graph_->bundles()[b];
    const auto off = static_cast<Eigen::Index>(graph_->weight_offset(b));
    const auto i = static_cast<Eigen::Index>(2 * bundle.i);
    const auto j = static_cast<Eigen::Index>(2 * bundle.j);
    g.w[off] = 2.0 * w[off] * tau2;
    for (std::size_t k = 1; k <= bundle.candidates.size(); ++k) {
      const double wk = w[off + static_cast<Eigen::Index>(k)];
      const Vec2 r = residual(*graph_, h, b, k);
      g.w[off + static_cast<Eigen::Index>(k)] = 2.0 * wk * r.squaredNorm();
      const Vec2 gr = 2.0 * wk * wk * r;
      g.h.segment<2>(i) += gr;
      g.h.segment<2>(j) -= gr;
    }
  }
  for (std::size_t n = 0; n < pinned_.size(); ++n) {
    if (pinned_[n]) g.h.segment<2>(static_cast<Eigen::Index>(2 * n)).setZero();
  }
  return g;
}

ReducedSystem AlignmentProblem::hessian_system(const Eigen::VectorXd& h, const Eigen::VectorXd& w,
                                               double lambda) const {
  const Eigen::Index nf = num_free_;
  const auto nw = static_cast<Eigen::Index>(basis_.cols());
  const Eigen::Index n = nf + nw;
  const double tau2 = tau_ * tau_;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * 8);
  auto add = [&](Eigen::Index r, Eigen::Index c, double v) {
    if (r >= 0 && c >= 0 && v != 0.0) trip.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
  };

  std::vector<double> diag;
  std::vector<Eigen::Vector2d> coupling;  // d^2 f / (d h_i d w_k), per weight row
  for (std::size_t b = 0; b < graph_->num_bundles(); ++b) {
    const auto& bundle = graph_->bundles()[b];
    const auto off = static_cast<Eigen::Index>(graph_->weight_offset(b));
    const std::size_t m = bundle.size();
    const auto ni = static_cast<std::size_t>(bundle.i);
    const auto nj = static_cast<std::size_t>(bundle.j);

    diag.assign(m, 0.0);
    coupling.assign(m, Eigen::Vector2d::Zero());
    diag[0] = 2.0 * tau2;
    double hh = 0.0;
    for (std::size_t k = 1; k < m; ++k) {
      const double wk = w[off + static_cast<Eigen::Index>(k)];
      const Vec2 r = residual(*graph_, h, b, k);
      diag[k] = 2.0 * r.squaredNorm();
      coupling[k] = 4.0 * wk * r;
      hh += 2.0 * wk * wk;
    }
    for (int axis = 0; axis < 2; ++axis) {
      const Eigen::Index fi = free_index(ni, axis);
      const Eigen::Index fj = free_index(nj, axis);
      add(fi, fi, hh);
      add(fj, fj, hh);
      add(fi, fj, -hh);
      add(fj, fi, -hh);
    }

    const auto& z = basis_.block(b);
    const auto col0 = nf + static_cast<Eigen::Index>(basis_.col_offset(b));
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
      Eigen::Vector2d hz = Eigen::Vector2d::Zero();
      for (std::size_t k = 1; k < m; ++k) hz += coupling[k] * z(static_cast<Eigen::Index>(k), c);
      for (int axis = 0; axis < 2; ++axis) {
        const Eigen::Index fi = free_index(ni, axis);
        const Eigen::Index fj = free_index(nj, axis);
        add(fi, col0 + c, hz[axis]);
        add(col0 + c, fi, hz[axis]);
        add(fj, col0 + c, -hz[axis]);
        add(col0 + c, fj, -hz[axis]);
      }
      for (Eigen::Index c2 = 0; c2 < z.cols(); ++c2) {
        double v = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
          const auto kk = static_cast<Eigen::Index>(k);
          v += z(kk, c) * diag[k] * z(kk, c2);
        }
        add(col0 + c, col0 + c2, v);
      }
    }
  }
  for (Eigen::Index d = 0; d < n; ++d) trip.emplace_back(static_cast<int>(d), static_cast<int>(d), lambda);

  ReducedSystem sys;
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(trip.begin(), trip.end());

  const Gradient g = gradient(h, w);
  sys.rhs.resize(n);
  for (std::size_t k = 0; k < free_index_.size(); ++k) {
    if (free_index_[k] >= 0) sys.rhs[free_index_[k]] = -g.h[static_cast<Eigen::Index>(k)];
  }
  sys.rhs.tail(nw) = -basis_.apply_transpose(g.w);
  return sys;
}

Eigen::VectorXd AlignmentProblem::balanced_weights(const Eigen::VectorXd& h) const {
  Eigen::VectorXd w(static_cast<Eigen::Index>(graph_->num_weights()));
  const double tau2 = tau_ * tau_;
  // Costs this small relative to tau^2 are treated as exact fits.
  const double zero_cost = 1e-28 * tau2;
  std::vector<double> cost;
  for (std::size_t b = 0; b < graph_->num_bundles(); ++b) {
    const auto& bundle = graph_->bundles()[b];
    const auto off = static_cast<Eigen::Index>(graph_->weight_offset(b));
    const std::size_t m = bundle.size();
    cost.assign(m, tau2);
    for (std::size_t k = 1; k < m; ++k) cost[k] = residual(*graph_, h, b, k).squaredNorm();

    const auto zeros = std::count_if(cost.begin(), cost.end(), [&](double c) { return c <= zero_cost; });
    if (zeros > 0) {
      for (std::size_t k = 0; k < m; ++k) {
        w[off + static_cast<Eigen::Index>(k)] = cost[k] <= zero_cost ? 1.0 / static_cast<double>(zeros) : 0.0;
      }
      continue;
    }
    double inv_sum = 0.0;
    for (double c : cost) inv_sum += 1.0 / c;
    for (std::size_t k = 0; k < m; ++k) {
      w[off + static_cast<Eigen::Index>(k)] = (1.0 / cost[k]) / inv_sum;
    }
  }
  return w;
}

SolverState AlignmentProblem::initial_state(double lambda0) const {
  SolverState s;
  s.h.resize(static_cast<Eigen::Index>(2 * graph_->num_nodes()));
  for (std::size_t n = 0; n < graph_->num_nodes(); ++n) {
    s.h.segment<2>(static_cast<Eigen::Index>(2 * n)) = graph_->nodes()[n].nominal_offset;
  }
  s.w.resize(static_cast<Eigen::Index>(graph_->num_weights()));
  for (std::size_t b = 0; b < graph_->num_bundles(); ++b) {
    const std::size_t m = graph_->bundles()[b].size();
    s.w.segment(static_cast<Eigen::Index>(graph_->weight_offset(b)), static_cast<Eigen::Index>(m))
        .setConstant(1.0 / static_cast<double>(m));
  }
  s.lambda = lambda0;
  s.loss = loss(s.h, s.w);
  return s;
}

double AlignmentProblem::constraint_violation(const Eigen::VectorXd& w) const {
  double worst = 0.0;
  for (std::size_t b = 0; b < graph_->num_bundles(); ++b) {
    const auto m = static_cast<Eigen::Index>(graph_->bundles()[b].size());
    const double s = w.segment(static_cast<Eigen::Index>(graph_->weight_offset(b)), m).sum();
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

StepResult projected_gd_step(const AlignmentProblem& problem, const SolverState& state,
                             double gamma_h, double gamma_w, int max_halvings) {
  StepResult out{state, StepStatus::Stalled, false, {}};
  const Gradient g = problem.gradient(state.h, state.w);
  const Eigen::VectorXd pw = problem.basis().project(g.w);

  double scale = std::min(1.0, 2.0 * state.gd_scale);
  for (int halving = 0; halving <= max_halvings; ++halving, scale *= 0.5) {
    if (scale * std::max(gamma_h, gamma_w) < 1e-12) break;
    Eigen::VectorXd h = state.h - scale * gamma_h * g.h;
    Eigen::VectorXd w = state.w - scale * gamma_w * pw;
    const double f = problem.loss(h, w);
    if (f < state.loss) {
      out.state.h = std::move(h);
      out.state.w = std::move(w);
      out.state.loss = f;
      out.state.gd_scale = scale;
      out.state.iteration = state.iteration + 1;
      out.status = StepStatus::Accepted;
      return out;
    }
  }
  return out;
}

CgResult jacobi_pcg(const Eigen::SparseMatrix<double>& matrix, const Eigen::VectorXd& rhs,
                    int max_iters, double rel_residual) {
  CgResult out;
  out.x = Eigen::VectorXd::Zero(rhs.size());
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) {
    out.relative_residual = 0.0;
    return out;
  }
  const Eigen::VectorXd diag = matrix.diagonal();
  if ((diag.array() <= 0.0).any()) {
    out.non_positive_curvature = true;
    return out;
  }
  const Eigen::VectorXd inv_diag = diag.cwiseInverse();

  Eigen::VectorXd r = rhs;
  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  for (int it = 0; it < max_iters; ++it) {
    const Eigen::VectorXd mp = matrix * p;
    const double curvature = p.dot(mp);
    if (!(curvature > 0.0)) {
      out.non_positive_curvature = true;
      return out;
    }
    const double alpha = rz / curvature;
    out.x += alpha * p;
    r -= alpha * mp;
    out.iterations = it + 1;
    out.relative_residual = r.norm() / rhs_norm;
    if (out.relative_residual <= rel_residual) break;
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  return out;
}

StepResult lm_step(const AlignmentProblem& problem, const SolverState& state, const SolverConfig& config) {
  StepResult out{state, StepStatus::Stalled, false, {}};
  const Eigen::Index nf = problem.num_free_offsets();
  double lambda = std::max(state.lambda, config.lambda_min);

  for (int attempt = 0; attempt < config.lm_retries; ++attempt) {
    out.lambdas_tried.push_back(lambda);
    const ReducedSystem sys = problem.hessian_system(state.h, state.w, lambda);
    const CgResult cg = jacobi_pcg(sys.matrix, sys.rhs, config.cg_max_iters, config.cg_rel_residual);
    if (cg.non_positive_curvature) {
      lambda *= config.lambda_up;
      continue;
    }
    Eigen::VectorXd h = state.h + problem.expand_offsets(cg.x.head(nf));
    Eigen::VectorXd w = state.w + problem.basis().apply(cg.x.tail(cg.x.size() - nf));
    const double f = problem.loss(h, w);
    if (f < state.loss) {
      out.state.h = std::move(h);
      out.state.w = std::move(w);
      out.state.loss = f;
      out.state.lambda = std::max(lambda * config.lambda_down, config.lambda_min);
      out.state.iteration = state.iteration + 1;
      out.status = StepStatus::Accepted;
      return out;
    }
    lambda *= config.lambda_up;
  }

  StepResult gd = projected_gd_step(problem, state, config.gd_gamma_h, config.gd_gamma_w,
                                    config.gd_max_halvings);
  gd.used_fallback = true;
  gd.lambdas_tried = std::move(out.lambdas_tried);
  gd.state.lambda = lambda;
  return gd;
}

std::vector<int> select_candidates(const AlignmentMultigraph& graph, const Eigen::VectorXd& w) {
  std::vector<int> selected;
  selected.reserve(graph.num_bundles());
  for (std::size_t b = 0; b < graph.num_bundles(); ++b) {
    const auto off = static_cast<Eigen::Index>(graph.weight_offset(b));
    const std::size_t m = graph.bundles()[b].size();
    int best = 0;
    double best_w = w[off];
    for (std::size_t k = 1; k < m; ++k) {
      const double wk = w[off + static_cast<Eigen::Index>(k)];
      if (wk > best_w) {
        best_w = wk;
        best = static_cast<int>(k);
      }
    }
    selected.push_back(best);
  }
  return selected;
}

SolveReport solve(const AlignmentMultigraph& graph, const SolverConfig& config) {
  config.validate();
  const double tau = config.tau.value_or(graph.tau());
  const AlignmentProblem problem(graph, tau);

  SolveReport report;
  SolverState state = problem.initial_state(config.lambda0);
  report.loss_curve.push_back(state.loss);
  report.max_constraint_violation = problem.constraint_violation(state.w);
  // Loss values this small relative to tau^2 per bundle count as an exact fit.
  const double loss_floor = 1e-24 * tau * tau * static_cast<double>(std::max<std::size_t>(1, graph.num_bundles()));

  for (int it = 0; it < config.max_iterations; ++it) {
    if (graph.num_bundles() == 0 || state.loss <= loss_floor) {
      report.converged = true;
      break;
    }
    const double previous = state.loss;
    StepResult step = config.mode == SolverMode::LevenbergMarquardt
                          ? lm_step(problem, state, config)
                          : projected_gd_step(problem, state, config.gd_gamma_h, config.gd_gamma_w,
                                              config.gd_max_halvings);
    if (step.used_fallback) ++report.fallback_steps;
    if (step.status != StepStatus::Accepted) {
      report.converged = true;
      break;
    }
    state = std::move(step.state);
    report.loss_curve.push_back(state.loss);
    if (config.mode == SolverMode::LevenbergMarquardt) report.lambda_history.push_back(state.lambda);
    report.max_constraint_violation =
        std::max(report.max_constraint_violation, problem.constraint_violation(state.w));
    if ((previous - state.loss) < config.rel_tol * previous) {
      report.converged = true;
      break;
    }
  }
  report.iterations = state.iteration;

  if (config.balance_weights && graph.num_bundles() > 0) {
    Eigen::VectorXd w = problem.balanced_weights(state.h);
    const double f = problem.loss(state.h, w);
    if (f <= state.loss) {
      state.w = std::move(w);
      state.loss = f;
      report.loss_curve.push_back(f);
      report.max_constraint_violation =
          std::max(report.max_constraint_violation, problem.constraint_violation(state.w));
    }
  }

  report.h = state.h;
  report.w = state.w;
  report.loss = state.loss;
  report.selected = select_candidates(graph, state.w);

  EdgeList edges;
  for (const auto& b : graph.bundles()) edges.emplace_back(b.i, b.j);
  const auto bridges = bridge_mask(graph.num_nodes(), edges);
  for (std::size_t b = 0; b < bridges.size(); ++b) {
    if (bridges[b]) report.acyclic_bundles.push_back(b);
  }
  return report;
}

void apply_solution(AlignmentMultigraph& graph, const SolveReport& report) {
  graph.set_flat_weights(report.w);
  for (std::size_t n = 0; n < graph.num_nodes(); ++n) graph.nodes()[n].solved_offset = report.offset(n);
  graph.mark_solved();
}

std::string report_to_json(const AlignmentMultigraph& graph, const SolveReport& report) {
  nlohmann::json doc;
  doc["loss"] = report.loss;
  doc["iterations"] = report.iterations;
  nlohmann::json offsets = nlohmann::json::array();
  for (std::size_t n = 0; n < graph.num_nodes(); ++n) {
    const Vec2 o = report.offset(n);
    offsets.push_back({o.x(), o.y()});
  }
  doc["offsets"] = std::move(offsets);
  nlohmann::json selected = nlohmann::json::array();
  for (std::size_t b = 0; b < graph.num_bundles(); ++b) {
    selected.push_back({{"i", graph.bundles()[b].i}, {"j", graph.bundles()[b].j}, {"choice", report.selected[b]}});
  }
  doc["selected"] = std::move(selected);
  doc["loss_curve"] = report.loss_curve;
  doc["acyclic_bundles"] = report.acyclic_bundles;
  return doc.dump(2);
}

}  // namespace multistitch
