#include "lslp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace lslp {

Vector project_sphere(const Vector& a) {
  const Eigen::Index n = a.size();
  if (n < 1) throw std::invalid_argument("project_sphere: empty vector");
  const double radius = 0.5 * std::sqrt(static_cast<double>(n));
  Vector centered = a.array() - 0.5;
  const double norm = centered.norm();
  if (norm < 1e-14) {
    return Vector::Constant(n, 0.5 + radius / std::sqrt(static_cast<double>(n)));
  }
  return (centered * (radius / norm)).array() + 0.5;
}

double sphere_violation(const Vector& x) {
  return (x.array() - 0.5).matrix().squaredNorm() - 0.25 * static_cast<double>(x.size());
}

Vector project_simplex(const Vector& a) {
  const Eigen::Index n = a.size();
  if (n < 1) throw std::invalid_argument("project_simplex: empty vector");
  std::vector<double> sorted(a.data(), a.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cumulative += sorted[static_cast<std::size_t>(k)];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[static_cast<std::size_t>(k)] - candidate > 0.0) tau = candidate;
  }
  return (a.array() - tau).cwiseMax(0.0);
}

std::string_view to_string(SolutionType type) {
  switch (type) {
    case SolutionType::kValid: return "Valid";
    case SolutionType::kUniform: return "Uniform";
    case SolutionType::kFractional: return "Fractional";
    case SolutionType::kApproximate: return "Approximate";
  }
  return "Approximate";
}

namespace {

double simplex_violation(const Vector& v) {
  const double sum_err = std::abs(v.sum() - 1.0);
  const double neg = std::max(0.0, -v.minCoeff());
  return std::max(sum_err, neg);
}

double integrality_gap(const Vector& v) {
  return v.unaryExpr([](double x) { return std::min(std::abs(x), std::abs(1.0 - x)); })
      .maxCoeff();
}

}  // namespace

SolutionClass classify_solution(const PrimalState& state, const FactorGraph& graph,
                                const ClassifyTolerances& tol) {
  if (state.mu_vars.size() != graph.num_variables() ||
      state.mu_factors.size() != graph.num_factors()) {
    throw GraphError("classify_solution: state does not match graph");
  }
  SolutionClass out;
  for (std::size_t i = 0; i < graph.num_variables(); ++i) {
    if (static_cast<std::size_t>(state.mu_vars[i].size()) != graph.cardinality(i)) {
      throw GraphError("classify_solution: variable marginal has wrong length");
    }
    out.simplex_violation = std::max(out.simplex_violation, simplex_violation(state.mu_vars[i]));
    out.integrality_gap = std::max(out.integrality_gap, integrality_gap(state.mu_vars[i]));
  }
  for (std::size_t f = 0; f < graph.num_factors(); ++f) {
    if (static_cast<std::size_t>(state.mu_factors[f].size()) != graph.factor_size(f)) {
      throw GraphError("classify_solution: factor marginal has wrong length");
    }
    out.simplex_violation =
        std::max(out.simplex_violation, simplex_violation(state.mu_factors[f]));
    out.integrality_gap = std::max(out.integrality_gap, integrality_gap(state.mu_factors[f]));
  }
  Vector projected;
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const Edge& edge = graph.edge(e);
    graph.consistency(e).apply(state.mu_factors[edge.factor], projected);
    out.consistency_violation = std::max(
        out.consistency_violation, (projected - state.mu_vars[edge.var]).cwiseAbs().maxCoeff());
  }

  if (out.simplex_violation > tol.consistency || out.consistency_violation > tol.consistency) {
    out.type = SolutionType::kApproximate;
  } else if (out.integrality_gap <= tol.integrality) {
    out.type = SolutionType::kValid;
  } else {
    bool uniform = true;
    for (std::size_t i = 0; i < graph.num_variables() && uniform; ++i) {
      const double u = 1.0 / static_cast<double>(graph.cardinality(i));
      uniform = (state.mu_vars[i].array() - u).abs().maxCoeff() <= tol.integrality;
    }
    out.type = uniform ? SolutionType::kUniform : SolutionType::kFractional;
  }
  return out;
}

}  // namespace lslp
