#pragma once

#include <cstddef>
#include <stdexcept>

#include "lslp/factor_graph.hpp"
#include "lslp/qp_simplex.hpp"

namespace lslp::oracle {

// Reference solvers used to check the production code paths. They share no
// numerical routines with the solver beyond the graph container itself.

struct OracleLimit {
  std::size_t max_total_configs = std::size_t{1} << 20;
};

class TooLargeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MapSolution {
  Labeling labeling;
  double logpot = 0.0;
};

/// Exhaustive MAP by enumerating every joint labeling, last variable
/// fastest. Ties keep the lexicographically smallest labeling.
MapSolution brute_force_map(const FactorGraph& graph, const OracleLimit& limit = {});

/// Term-by-term logPot that walks factor tables with its own stride
/// arithmetic instead of factor_config_index.
double naive_logpot(const FactorGraph& graph, const Labeling& labeling);

/// Plain projected gradient, step 1/lambda_max(Q), from the barycenter.
Vector pgd_qp_oracle(const SimplexQp& problem, std::size_t horizon);

/// Exact minimizer by enumerating every support set and solving its KKT
/// system; intended for n <= 10.
Vector support_enumeration_qp(const Matrix& q, const Vector& c);

/// Simplex projection by bisection on the threshold.
Vector bisection_simplex_projection(const Vector& a);

}  // namespace lslp::oracle
