#pragma once

#include <cstddef>
#include <cstdint>
#include <ranges>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace lslp {

using Vector = Eigen::VectorXd;

/// A factor over two or more variables. The table holds one log-potential per
/// joint configuration, enumerated with the last scope variable varying
/// fastest.
struct FactorSpec {
  std::vector<std::size_t> scope;
  std::vector<double> logpot_table;
};

/// Per-variable state assignment.
struct Labeling {
  std::vector<std::size_t> states;

  bool operator==(const Labeling&) const = default;
};

/// Maps every configuration index of a factor to the state that one of its
/// scope variables takes in that configuration. Viewed as a 0/1 matrix with
/// one row per variable state and one column per configuration this is the
/// local marginalization operator between the factor and the variable.
class ConsistencyMap {
 public:
  ConsistencyMap() = default;
  ConsistencyMap(std::span<const std::size_t> scope_cards, std::size_t position);

  std::size_t num_configs() const { return state_of_.size(); }
  std::size_t num_states() const { return num_states_; }
  std::size_t state_of(std::size_t config) const { return state_of_[config]; }
  std::span<const std::uint32_t> table() const { return state_of_; }

  /// out = M * factor_marginal  (gather-sum over configurations).
  void apply(const Vector& factor_marginal, Vector& out) const;
  Vector apply(const Vector& factor_marginal) const;

  /// out += scale * M^T * var_vector  (scatter by configuration).
  void apply_transpose_add(const Vector& var_vector, double scale, Vector& out) const;

 private:
  std::vector<std::uint32_t> state_of_;
  std::size_t num_states_ = 0;
};

/// Link between variable `var` and factor `factor`, where the variable sits
/// at `position` in the factor scope.
struct Edge {
  std::size_t var;
  std::size_t factor;
  std::size_t position;
};

class GraphError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Discrete factor graph with unary log-potentials on every variable and
/// higher-order log-potential tables on factors. Immutable once built.
class FactorGraph {
 public:
  FactorGraph() = default;
  FactorGraph(std::vector<std::size_t> cardinalities,
              std::vector<std::vector<double>> unary_logpot,
              std::vector<FactorSpec> factors);

  std::size_t num_variables() const { return cards_.size(); }
  std::size_t num_factors() const { return factors_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  std::size_t cardinality(std::size_t var) const { return cards_[var]; }
  const std::vector<std::size_t>& cardinalities() const { return cards_; }
  const Vector& unary(std::size_t var) const { return unary_[var]; }
  const FactorSpec& factor(std::size_t f) const { return factors_[f]; }
  const Vector& factor_logpot(std::size_t f) const { return factor_logpot_[f]; }
  std::size_t factor_size(std::size_t f) const { return factors_[f].logpot_table.size(); }

  const Edge& edge(std::size_t e) const { return edges_[e]; }
  const ConsistencyMap& consistency(std::size_t e) const { return maps_[e]; }

  /// Edge ids of the factors adjacent to a variable, in factor order.
  std::span<const std::size_t> var_edges(std::size_t var) const;
  /// Edge ids of a factor, in scope order. They are contiguous.
  auto factor_edges(std::size_t f) const {
    return std::views::iota(factor_edge_offsets_[f], factor_edge_offsets_[f + 1]);
  }

  std::size_t degree(std::size_t var) const { return var_edges(var).size(); }
  std::size_t total_var_states() const { return total_var_states_; }

  bool operator==(const FactorGraph& other) const;

 private:
  std::vector<std::size_t> cards_;
  std::vector<Vector> unary_;
  std::vector<FactorSpec> factors_;
  std::vector<Vector> factor_logpot_;
  std::vector<Edge> edges_;
  std::vector<ConsistencyMap> maps_;
  // CSR adjacency from variables to their edges.
  std::vector<std::size_t> var_edge_offsets_;
  std::vector<std::size_t> var_edge_ids_;
  std::vector<std::size_t> factor_edge_offsets_;
  std::size_t total_var_states_ = 0;
};

/// Mixed-radix index of a joint configuration, last variable fastest.
std::size_t factor_config_index(std::span<const std::size_t> scope_states,
                                std::span<const std::size_t> scope_cards);

/// Inverse of factor_config_index.
std::vector<std::size_t> factor_config_states(std::size_t index,
                                              std::span<const std::size_t> scope_cards);

/// Throws GraphError if the labeling does not fit the graph.
void check_labeling(const FactorGraph& graph, const Labeling& labeling);

/// Configuration index of factor `f` under `labeling`.
std::size_t factor_config_of(const FactorGraph& graph, std::size_t f, const Labeling& labeling);

/// Sum of unary and factor log-potentials of a labeling.
double evaluate_logpot(const FactorGraph& graph, const Labeling& labeling);

/// Overcomplete marginals: per-variable mu_i, per-factor mu_alpha, and the
/// sphere copy upsilon_i of every variable.
struct PrimalState {
  std::vector<Vector> mu_vars;
  std::vector<Vector> mu_factors;
  std::vector<Vector> upsilon;
};

/// One-hot encoding of a labeling; upsilon equals mu_vars.
PrimalState encode_labeling(const FactorGraph& graph, const Labeling& labeling);

}  // namespace lslp
