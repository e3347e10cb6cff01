#pragma once

#include <string>
#include <string_view>

#include "lslp/factor_graph.hpp"

namespace lslp {

/// Euclidean projection onto the sphere {x : ||x - 1/2||^2 = n/4}, which
/// passes through every 0/1 vector of length n. At the exact center the
/// direction +1/sqrt(n) is used.
Vector project_sphere(const Vector& a);

/// Squared distance of x from the sphere center, minus n/4.
double sphere_violation(const Vector& x);

/// Euclidean projection onto the probability simplex (sort-and-threshold).
Vector project_simplex(const Vector& a);

enum class SolutionType { kValid, kUniform, kFractional, kApproximate };

std::string_view to_string(SolutionType type);

struct SolutionClass {
  SolutionType type = SolutionType::kApproximate;
  /// Largest distance of any marginal entry from {0, 1}.
  double integrality_gap = 0.0;
  /// Largest |M mu_alpha - mu_i| entry over all edges.
  double consistency_violation = 0.0;
  /// Largest simplex violation (|sum - 1| or negative entry) over all blocks.
  double simplex_violation = 0.0;
};

struct ClassifyTolerances {
  double integrality = 1e-4;
  double consistency = 1e-4;
};

/// Valid / Uniform / Fractional / Approximate decision for a set of
/// marginals. Constraint violation is checked first; among feasible points
/// integrality decides Valid, then uniformity of every variable decides
/// Uniform.
SolutionClass classify_solution(const PrimalState& state, const FactorGraph& graph,
                                const ClassifyTolerances& tol = {});

}  // namespace lslp
