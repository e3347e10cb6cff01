#include "lslp/admm_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "lslp/parallel.hpp"

namespace lslp {

void SolverConfig::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(eta >= 1.0)) throw std::invalid_argument("eta must be >= 1");
  if (!(stop_tol > 0.0)) throw std::invalid_argument("stop tolerance must be positive");
  if (!(init_jitter >= 0.0)) throw std::invalid_argument("jitter must be non-negative");
  if (fixed_rho) {
    if (!(*fixed_rho > 0.0)) throw std::invalid_argument("fixed rho must be positive");
  } else {
    if (!(rho0 > 0.0)) throw std::invalid_argument("rho0 must be positive");
    if (!(rho_upper > 1.0 / epsilon)) {
      throw std::invalid_argument("rho upper limit must exceed 1/epsilon");
    }
  }
}

std::string_view to_string(SolveStatus status) {
  return status == SolveStatus::kConverged ? "Converged" : "MaxIters";
}

namespace {

Vector stack(const std::vector<Vector>& blocks, std::size_t total) {
  Vector out(static_cast<Eigen::Index>(total));
  Eigen::Index offset = 0;
  for (const Vector& b : blocks) {
    out.segment(offset, b.size()) = b;
    offset += b.size();
  }
  return out;
}

void unstack(const Vector& flat, std::vector<Vector>& blocks) {
  Eigen::Index offset = 0;
  for (Vector& b : blocks) {
    b = flat.segment(offset, b.size());
    offset += b.size();
  }
}

double squared_distance(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += (a[i] - b[i]).squaredNorm();
  return total;
}

}  // namespace

std::pair<PrimalState, DualState> init_state(const FactorGraph& graph,
                                             const SolverConfig& config) {
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  auto jittered_uniform = [&](std::size_t n) {
    Vector v = Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
    if (config.init_jitter > 0.0) {
      for (Eigen::Index j = 0; j < v.size(); ++j) v[j] += config.init_jitter * noise(rng);
      v = project_simplex(v);
    }
    return v;
  };

  PrimalState state;
  state.mu_vars.reserve(graph.num_variables());
  for (std::size_t i = 0; i < graph.num_variables(); ++i) {
    state.mu_vars.push_back(jittered_uniform(graph.cardinality(i)));
  }
  state.mu_factors.reserve(graph.num_factors());
  for (std::size_t f = 0; f < graph.num_factors(); ++f) {
    state.mu_factors.push_back(jittered_uniform(graph.factor_size(f)));
  }

  DualState duals;
  duals.lambda_vars.reserve(graph.num_variables());
  for (std::size_t i = 0; i < graph.num_variables(); ++i) {
    duals.lambda_vars.push_back(Vector::Zero(static_cast<Eigen::Index>(graph.cardinality(i))));
  }
  duals.lambda_edges.reserve(graph.num_edges());
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    duals.lambda_edges.push_back(
        Vector::Zero(static_cast<Eigen::Index>(graph.cardinality(graph.edge(e).var))));
  }

  state.upsilon = state.mu_vars;
  if (graph.num_variables() > 0) {
    Vector scaled = (1.0 + config.epsilon) * stack(state.mu_vars, graph.total_var_states());
    unstack(project_sphere(scaled), state.upsilon);
  }
  return {std::move(state), std::move(duals)};
}

std::vector<Vector> update_upsilon(const PrimalState& state, const DualState& duals,
                                   const FactorGraph& graph, double rho, double epsilon) {
  std::vector<Vector> upsilon = state.upsilon;
  if (graph.num_variables() == 0) return upsilon;
  Vector target(static_cast<Eigen::Index>(graph.total_var_states()));
  Eigen::Index offset = 0;
  for (std::size_t i = 0; i < graph.num_variables(); ++i) {
    const Eigen::Index n = state.mu_vars[i].size();
    target.segment(offset, n) = (1.0 + epsilon) * state.mu_vars[i] + duals.lambda_vars[i] / rho;
    offset += n;
  }
  unstack(project_sphere(target), upsilon);
  return upsilon;
}

Matrix factor_gram(const FactorGraph& graph, std::size_t f) {
  const auto n = static_cast<Eigen::Index>(graph.factor_size(f));
  Matrix gram = Matrix::Zero(n, n);
  for (std::size_t e : graph.factor_edges(f)) {
    const ConsistencyMap& map = graph.consistency(e);
    for (Eigen::Index t = 0; t < n; ++t) {
      const auto st = map.state_of(static_cast<std::size_t>(t));
      for (Eigen::Index u = 0; u < n; ++u) {
        if (map.state_of(static_cast<std::size_t>(u)) == st) gram(t, u) += 1.0;
      }
    }
  }
  return gram;
}

SimplexQp build_factor_qp(std::size_t f, const PrimalState& state, const DualState& duals,
                          const FactorGraph& graph, double rho, double epsilon,
                          const Matrix* gram) {
  SimplexQp qp;
  qp.dim = graph.factor_size(f);

  // Q = rho * sum_i M_i^T M_i, applied as gather then scatter.
  qp.apply = [&graph, f, rho](const Vector& x, Vector& out) {
    out.setZero(x.size());
    Vector marginal;
    for (std::size_t e : graph.factor_edges(f)) {
      const ConsistencyMap& map = graph.consistency(e);
      map.apply(x, marginal);
      map.apply_transpose_add(marginal, rho, out);
    }
  };
  if (gram != nullptr) {
    qp.materialize = [gram, rho] { return Matrix(rho * *gram); };
  }

  // c = -theta_a - sum_i M_i^T (rho (1+eps) mu_i + lambda_ia)
  qp.linear = -graph.factor_logpot(f);
  Vector pull;
  for (std::size_t e : graph.factor_edges(f)) {
    const std::size_t i = graph.edge(e).var;
    pull = rho * (1.0 + epsilon) * state.mu_vars[i] + duals.lambda_edges[e];
    graph.consistency(e).apply_transpose_add(pull, -1.0, qp.linear);
  }
  return qp;
}

QpResult update_factor(std::size_t f, const PrimalState& state, const DualState& duals,
                       const FactorGraph& graph, double rho, double epsilon,
                       const QpOptions& qp_options, const Matrix* gram) {
  const SimplexQp qp = build_factor_qp(f, state, duals, graph, rho, epsilon, gram);
  return solve_simplex_qp(qp, qp_options, &state.mu_factors[f]);
}

VariableQuadratic variable_quadratic(std::size_t var, const PrimalState& state,
                                     const DualState& duals, const FactorGraph& graph, double rho,
                                     double epsilon) {
  const auto edges = graph.var_edges(var);
  const double degree = static_cast<double>(edges.size());
  const double scale = 1.0 + epsilon;
  VariableQuadratic quad;
  quad.a = 0.5 * (epsilon * (degree + 2.0) + rho * scale * scale * (degree + 1.0));
  Vector inner = duals.lambda_vars[var] - rho * state.upsilon[var];
  Vector marginal;
  for (std::size_t e : edges) {
    graph.consistency(e).apply(state.mu_factors[graph.edge(e).factor], marginal);
    inner += duals.lambda_edges[e] - rho * marginal;
  }
  quad.b = scale * inner - graph.unary(var);
  return quad;
}

std::vector<Vector> update_variables(const PrimalState& state, const DualState& duals,
                                     const FactorGraph& graph, double rho, double epsilon) {
  std::vector<Vector> mu(graph.num_variables());
  for (std::size_t i = 0; i < graph.num_variables(); ++i) {
    const VariableQuadratic quad = variable_quadratic(i, state, duals, graph, rho, epsilon);
    if (!(quad.a > 0.0)) {
      throw std::logic_error("variable update: non-positive curvature for variable " +
                             std::to_string(i));
    }
    mu[i] = -quad.b / (2.0 * quad.a);
  }
  return mu;
}

DualState update_duals(const PrimalState& state, const DualState& duals, const FactorGraph& graph,
                       double rho, double epsilon) {
  DualState next = duals;
  const double scale = 1.0 + epsilon;
  for (std::size_t i = 0; i < graph.num_variables(); ++i) {
    next.lambda_vars[i] += rho * (scale * state.mu_vars[i] - state.upsilon[i]);
  }
  Vector marginal;
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const Edge& edge = graph.edge(e);
    graph.consistency(e).apply(state.mu_factors[edge.factor], marginal);
    next.lambda_edges[e] += rho * (scale * state.mu_vars[edge.var] - marginal);
  }
  return next;
}

double augmented_lagrangian(const PrimalState& state, const DualState& duals,
                            const FactorGraph& graph, double rho, double epsilon) {
  const double scale = 1.0 + epsilon;
  double value = 0.0;
  for (std::size_t f = 0; f < graph.num_factors(); ++f) {
    const Vector& mu = state.mu_factors[f];
    if (std::abs(mu.sum() - 1.0) > 1e-6 || mu.minCoeff() < -1e-6) {
      return std::numeric_limits<double>::infinity();
    }
    value -= graph.factor_logpot(f).dot(mu);
  }
  if (graph.num_variables() > 0) {
    const Vector ups = stack(state.upsilon, graph.total_var_states());
    if (std::abs(sphere_violation(ups)) > 1e-6 * (1.0 + 0.25 * static_cast<double>(ups.size()))) {
      return std::numeric_limits<double>::infinity();
    }
  }
  for (std::size_t i = 0; i < graph.num_variables(); ++i) {
    const Vector& mu = state.mu_vars[i];
    const double degree = static_cast<double>(graph.degree(i));
    value += -graph.unary(i).dot(mu) + 0.5 * epsilon * (degree + 2.0) * mu.squaredNorm();
    const Vector r = scale * mu - state.upsilon[i];
    value += duals.lambda_vars[i].dot(r) + 0.5 * rho * r.squaredNorm();
  }
  Vector marginal;
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const Edge& edge = graph.edge(e);
    graph.consistency(e).apply(state.mu_factors[edge.factor], marginal);
    const Vector r = scale * state.mu_vars[edge.var] - marginal;
    value += duals.lambda_edges[e].dot(r) + 0.5 * rho * r.squaredNorm();
  }
  return value;
}

double consistency_residual(const PrimalState& state, const FactorGraph& graph, double rho,
                            double epsilon) {
  double total = 0.0;
  Vector marginal;
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const Edge& edge = graph.edge(e);
    graph.consistency(e).apply(state.mu_factors[edge.factor], marginal);
    total += 0.5 * rho * ((1.0 + epsilon) * state.mu_vars[edge.var] - marginal).squaredNorm();
  }
  return std::sqrt(total);
}

double sphere_residual(const PrimalState& state, const FactorGraph& graph, double rho,
                       double epsilon) {
  double total = 0.0;
  for (std::size_t i = 0; i < graph.num_variables(); ++i) {
    total += 0.5 * rho * ((1.0 + epsilon) * state.mu_vars[i] - state.upsilon[i]).squaredNorm();
  }
  return std::sqrt(total);
}

KktReport kkt_residuals(const PrimalState& state, const DualState& duals, const FactorGraph& graph,
                        double epsilon) {
  const double scale = 1.0 + epsilon;
  KktReport report;
  Vector marginal;
  for (std::size_t i = 0; i < graph.num_variables(); ++i) {
    report.primal_max = std::max(
        report.primal_max, (scale * state.mu_vars[i] - state.upsilon[i]).norm());
  }
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const Edge& edge = graph.edge(e);
    graph.consistency(e).apply(state.mu_factors[edge.factor], marginal);
    report.primal_max =
        std::max(report.primal_max, (scale * state.mu_vars[edge.var] - marginal).norm());
  }

  report.stationarity.resize(graph.num_variables());
  for (std::size_t i = 0; i < graph.num_variables(); ++i) {
    Vector lambda_sum = duals.lambda_vars[i];
    for (std::size_t e : graph.var_edges(i)) lambda_sum += duals.lambda_edges[e];
    const double degree = static_cast<double>(graph.degree(i));
    const Vector grad =
        -graph.unary(i) + epsilon * (degree + 2.0) * state.mu_vars[i] + scale * lambda_sum;
    report.stationarity[i] = grad.norm();
    report.stationarity_max = std::max(report.stationarity_max, report.stationarity[i]);
  }

  report.factor_vi.resize(graph.num_factors());
  for (std::size_t f = 0; f < graph.num_factors(); ++f) {
    Vector grad = -graph.factor_logpot(f);
    for (std::size_t e : graph.factor_edges(f)) {
      graph.consistency(e).apply_transpose_add(duals.lambda_edges[e], -1.0, grad);
    }
    report.factor_vi[f] = std::max(0.0, simplex_vi_residual(state.mu_factors[f], grad));
    report.factor_vi_max = std::max(report.factor_vi_max, report.factor_vi[f]);
  }

  if (graph.num_variables() > 0) {
    const Vector lambda = stack(duals.lambda_vars, graph.total_var_states());
    const Vector normal = stack(state.upsilon, graph.total_var_states()).array() - 0.5;
    const double nn = normal.squaredNorm();
    const Vector tangent = nn > 0.0 ? Vector(lambda - (lambda.dot(normal) / nn) * normal) : lambda;
    report.sphere_tangent = tangent.norm();
  }
  return report;
}

Labeling extract_labeling(const PrimalState& state, const FactorGraph& graph) {
  Labeling labeling;
  labeling.states.resize(graph.num_variables());
  for (std::size_t i = 0; i < graph.num_variables(); ++i) {
    Eigen::Index best = 0;
    const Vector& mu = state.mu_vars[i];
    for (Eigen::Index s = 1; s < mu.size(); ++s) {
      if (mu[s] > mu[best]) best = s;
    }
    labeling.states[i] = static_cast<std::size_t>(best);
  }
  return labeling;
}

AdmmSolver::AdmmSolver(const FactorGraph& graph, SolverConfig config)
    : graph_(graph), config_(std::move(config)) {
  config_.validate();
  auto [state, duals] = init_state(graph_, config_);
  state_ = std::move(state);
  duals_ = std::move(duals);
  rho_ = config_.initial_rho();
  qp_results_.resize(graph_.num_factors());
  if (config_.qp.method == QpMethod::kActiveSet) {
    grams_.resize(graph_.num_factors());
    parallel_for(graph_.num_factors(), config_.workers,
                 [&](std::size_t f) { grams_[f] = factor_gram(graph_, f); });
  }
}

void AdmmSolver::reset(PrimalState state, DualState duals) {
  state_ = std::move(state);
  duals_ = std::move(duals);
}

TraceRecord AdmmSolver::step() {
  const double rho = rho_;
  const double eps = config_.epsilon;

  // y-block: sphere copies and factor marginals, all from iteration-k values.
  PrimalState next = state_;
  next.upsilon = update_upsilon(state_, duals_, graph_, rho, eps);
  parallel_for(graph_.num_factors(), config_.workers, [&](std::size_t f) {
    const Matrix* gram = grams_.empty() ? nullptr : &grams_[f];
    qp_results_[f] = update_factor(f, state_, duals_, graph_, rho, eps, config_.qp, gram);
    next.mu_factors[f] = qp_results_[f].solution;
  });

  // x-block: closed-form variable marginals.
  next.mu_vars = update_variables(next, duals_, graph_, rho, eps);

  DualState next_duals = update_duals(next, duals_, graph_, rho, eps);

  TraceRecord record;
  record.iter = iteration_;
  record.rho = rho;
  record.d_mu = std::sqrt(squared_distance(next.mu_vars, state_.mu_vars));
  record.d_lambda = std::sqrt(squared_distance(next_duals.lambda_vars, duals_.lambda_vars) +
                              squared_distance(next_duals.lambda_edges, duals_.lambda_edges));
  for (const QpResult& r : qp_results_) {
    record.max_factor_vi = std::max(record.max_factor_vi, r.vi_residual);
  }

  state_ = std::move(next);
  duals_ = std::move(next_duals);

  record.r_consistency = consistency_residual(state_, graph_, rho, eps);
  record.r_sphere = sphere_residual(state_, graph_, rho, eps);
  record.lagrangian = augmented_lagrangian(state_, duals_, graph_, rho, eps);
  Vector marginal;
  for (std::size_t i = 0; i < graph_.num_variables(); ++i) {
    record.max_sphere_violation =
        std::max(record.max_sphere_violation,
                 ((1.0 + eps) * state_.mu_vars[i] - state_.upsilon[i]).cwiseAbs().maxCoeff());
  }
  for (std::size_t e = 0; e < graph_.num_edges(); ++e) {
    const Edge& edge = graph_.edge(e);
    graph_.consistency(e).apply(state_.mu_factors[edge.factor], marginal);
    record.max_consistency_violation =
        std::max(record.max_consistency_violation,
                 ((1.0 + eps) * state_.mu_vars[edge.var] - marginal).cwiseAbs().maxCoeff());
  }

  ++iteration_;
  if (!config_.fixed_rho) rho_ = std::min(rho_ * config_.eta, config_.rho_upper);
  return record;
}

SolverResult AdmmSolver::solve() {
  SolverResult result;
  result.rho = rho_;

  Labeling best = extract_labeling(state_, graph_);
  double best_logpot = evaluate_logpot(graph_, best);

  while (iteration_ < config_.max_iter) {
    const TraceRecord record = step();
    result.rho = record.rho;
    if (config_.record_trace) result.trace.push_back(record);

    Labeling decoded = extract_labeling(state_, graph_);
    const double value = evaluate_logpot(graph_, decoded);
    if (value > best_logpot) {
      best_logpot = value;
      best = std::move(decoded);
    }
    if (record.r_consistency < config_.stop_tol && record.r_sphere < config_.stop_tol) {
      result.status = SolveStatus::kConverged;
      break;
    }
  }

  result.iterations = iteration_;
  result.classification = classify_solution(state_, graph_, config_.classify);
  if (result.status == SolveStatus::kConverged ||
      result.classification.type == SolutionType::kValid) {
    result.labeling = extract_labeling(state_, graph_);
  } else {
    result.labeling = std::move(best);
  }
  result.logpot = evaluate_logpot(graph_, result.labeling);

  const KktReport kkt = kkt_residuals(state_, duals_, graph_, config_.epsilon);
  result.residuals.consistency = consistency_residual(state_, graph_, result.rho, config_.epsilon);
  result.residuals.sphere = sphere_residual(state_, graph_, result.rho, config_.epsilon);
  result.residuals.stationarity_max = kkt.stationarity_max;
  result.residuals.factor_vi_max = kkt.factor_vi_max;
  result.state = state_;
  result.duals = duals_;
  return result;
}

SolverResult solve(const FactorGraph& graph, const SolverConfig& config) {
  AdmmSolver solver(graph, config);
  return solver.solve();
}

}  // namespace lslp
