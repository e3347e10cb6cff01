#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "lslp/factor_graph.hpp"
#include "lslp/geometry.hpp"
#include "lslp/qp_simplex.hpp"

namespace lslp {

/// Multipliers of the sphere-copy constraints (1+eps) mu_i = upsilon_i and
/// of the local-consistency constraints (1+eps) mu_i = M_ia mu_a.
struct DualState {
  std::vector<Vector> lambda_vars;
  std::vector<Vector> lambda_edges;
};

struct SolverConfig {
  double epsilon = 1e-5;
  double rho0 = 0.1;
  double eta = 1.03;
  double rho_upper = 2e5;
  double stop_tol = 1e-5;
  std::size_t max_iter = 500;
  /// When set, the penalty stays at this value for the whole run.
  std::optional<double> fixed_rho;
  double init_jitter = 1e-3;
  std::uint64_t seed = 0;
  QpOptions qp{};
  ClassifyTolerances classify{};
  std::size_t workers = 1;
  bool record_trace = true;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
  double initial_rho() const { return fixed_rho ? *fixed_rho : rho0; }
};

enum class SolveStatus { kConverged, kMaxIters };

std::string_view to_string(SolveStatus status);

struct TraceRecord {
  std::size_t iter = 0;
  double lagrangian = 0.0;
  double r_consistency = 0.0;
  double r_sphere = 0.0;
  double d_lambda = 0.0;
  double d_mu = 0.0;
  double rho = 0.0;
  double max_factor_vi = 0.0;
  /// Unweighted max-norm violations of the two coupling constraints.
  double max_consistency_violation = 0.0;
  double max_sphere_violation = 0.0;
};

/// Optimality report in the sense of an eps-KKT point.
struct KktReport {
  /// max over blocks of ||(1+eps) mu_i - upsilon_i|| and ||(1+eps) mu_i - M mu_a||.
  double primal_max = 0.0;
  /// ||-theta_i + eps (|N_i|+2) mu_i + (1+eps)(lambda_i + sum_a lambda_ia)|| per variable.
  std::vector<double> stationarity;
  double stationarity_max = 0.0;
  /// Simplex VI residual of -theta_a - sum_i M^T lambda_ia at mu_a, per factor.
  std::vector<double> factor_vi;
  double factor_vi_max = 0.0;
  /// Norm of the part of the stacked lambda_i tangent to the sphere at upsilon.
  double sphere_tangent = 0.0;
};

struct Residuals {
  double consistency = 0.0;
  double sphere = 0.0;
  double stationarity_max = 0.0;
  double factor_vi_max = 0.0;
};

struct SolverResult {
  Labeling labeling;
  double logpot = 0.0;
  SolveStatus status = SolveStatus::kMaxIters;
  SolutionClass classification;
  Residuals residuals;
  std::size_t iterations = 0;
  /// Penalty used by the last executed iteration.
  double rho = 0.0;
  std::vector<TraceRecord> trace;
  PrimalState state;
  DualState duals;
};

// Building blocks of one iteration. `rho` is the common penalty of every
// coupling constraint.

std::pair<PrimalState, DualState> init_state(const FactorGraph& graph, const SolverConfig& config);

/// Sphere-copy update: project the stacked (1+eps) mu_i + lambda_i / rho.
std::vector<Vector> update_upsilon(const PrimalState& state, const DualState& duals,
                                   const FactorGraph& graph, double rho, double epsilon);

/// Simplex QP solved for factor f given iteration-k variable marginals and
/// duals. `gram` optionally supplies sum_i M^T M for the factor.
SimplexQp build_factor_qp(std::size_t f, const PrimalState& state, const DualState& duals,
                          const FactorGraph& graph, double rho, double epsilon,
                          const Matrix* gram = nullptr);

/// sum over the factor's edges of M^T M, as a dense matrix.
Matrix factor_gram(const FactorGraph& graph, std::size_t f);

QpResult update_factor(std::size_t f, const PrimalState& state, const DualState& duals,
                       const FactorGraph& graph, double rho, double epsilon,
                       const QpOptions& qp_options, const Matrix* gram = nullptr);

/// Coefficients of the variable subproblem  a ||mu_i||^2 + <b, mu_i>.
struct VariableQuadratic {
  double a = 0.0;
  Vector b;
};

VariableQuadratic variable_quadratic(std::size_t var, const PrimalState& state,
                                     const DualState& duals, const FactorGraph& graph, double rho,
                                     double epsilon);

/// Closed-form minimizer -b / (2a) for every variable. Needs upsilon and the
/// factor marginals already at iteration k+1.
std::vector<Vector> update_variables(const PrimalState& state, const DualState& duals,
                                     const FactorGraph& graph, double rho, double epsilon);

DualState update_duals(const PrimalState& state, const DualState& duals, const FactorGraph& graph,
                       double rho, double epsilon);

/// Perturbed augmented Lagrangian. Returns +infinity when a factor marginal
/// is off the simplex or upsilon is off the sphere by more than 1e-6.
double augmented_lagrangian(const PrimalState& state, const DualState& duals,
                            const FactorGraph& graph, double rho, double epsilon);

/// rho-weighted stopping residuals:
///   sqrt(sum_edges rho/2 ||(1+eps) mu_i - M mu_a||^2)  and
///   sqrt(sum_vars  rho/2 ||(1+eps) mu_i - upsilon_i||^2).
double consistency_residual(const PrimalState& state, const FactorGraph& graph, double rho,
                            double epsilon);
double sphere_residual(const PrimalState& state, const FactorGraph& graph, double rho,
                       double epsilon);

KktReport kkt_residuals(const PrimalState& state, const DualState& duals, const FactorGraph& graph,
                        double epsilon);

/// argmax of every mu_i, ties to the lowest state.
Labeling extract_labeling(const PrimalState& state, const FactorGraph& graph);

/// Iteration driver for one model. Holds the primal/dual state and penalty.
class AdmmSolver {
 public:
  AdmmSolver(const FactorGraph& graph, SolverConfig config);

  /// One pass: upsilon and factor updates, variable update, dual update,
  /// then the penalty schedule.
  TraceRecord step();

  SolverResult solve();

  const PrimalState& state() const { return state_; }
  const DualState& duals() const { return duals_; }
  double rho() const { return rho_; }
  std::size_t iteration() const { return iteration_; }
  const SolverConfig& config() const { return config_; }

  /// Replaces the iterate, e.g. to start from a known point.
  void reset(PrimalState state, DualState duals);

 private:
  const FactorGraph& graph_;
  SolverConfig config_;
  PrimalState state_;
  DualState duals_;
  double rho_;
  std::size_t iteration_ = 0;
  std::vector<Matrix> grams_;
  std::vector<QpResult> qp_results_;
};

SolverResult solve(const FactorGraph& graph, const SolverConfig& config);

}  // namespace lslp
