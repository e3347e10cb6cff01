#include "lslp/factor_graph.hpp"

#include <cmath>
#include <string>

namespace lslp {

ConsistencyMap::ConsistencyMap(std::span<const std::size_t> scope_cards, std::size_t position) {
  if (position >= scope_cards.size()) {
    throw GraphError("consistency map position outside scope");
  }
  std::size_t total = 1;
  std::size_t stride = 1;
  for (std::size_t j = 0; j < scope_cards.size(); ++j) {
    total *= scope_cards[j];
    if (j > position) stride *= scope_cards[j];
  }
  num_states_ = scope_cards[position];
  state_of_.resize(total);
  for (std::size_t t = 0; t < total; ++t) {
    state_of_[t] = static_cast<std::uint32_t>((t / stride) % num_states_);
  }
}

void ConsistencyMap::apply(const Vector& factor_marginal, Vector& out) const {
  out.setZero(static_cast<Eigen::Index>(num_states_));
  for (std::size_t t = 0; t < state_of_.size(); ++t) {
    out[state_of_[t]] += factor_marginal[static_cast<Eigen::Index>(t)];
  }
}

Vector ConsistencyMap::apply(const Vector& factor_marginal) const {
  Vector out;
  apply(factor_marginal, out);
  return out;
}

void ConsistencyMap::apply_transpose_add(const Vector& var_vector, double scale,
                                         Vector& out) const {
  for (std::size_t t = 0; t < state_of_.size(); ++t) {
    out[static_cast<Eigen::Index>(t)] += scale * var_vector[state_of_[t]];
  }
}

FactorGraph::FactorGraph(std::vector<std::size_t> cardinalities,
                         std::vector<std::vector<double>> unary_logpot,
                         std::vector<FactorSpec> factors)
    : cards_(std::move(cardinalities)), factors_(std::move(factors)) {
  const std::size_t n = cards_.size();
  if (!unary_logpot.empty() && unary_logpot.size() != n) {
    throw GraphError("unary potential count does not match variable count");
  }
  unary_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (cards_[i] < 1) {
      throw GraphError("variable " + std::to_string(i) + " has cardinality < 1");
    }
    total_var_states_ += cards_[i];
    if (unary_logpot.empty() || unary_logpot[i].empty()) {
      unary_[i] = Vector::Zero(static_cast<Eigen::Index>(cards_[i]));
      continue;
    }
    if (unary_logpot[i].size() != cards_[i]) {
      throw GraphError("unary potential of variable " + std::to_string(i) +
                       " has wrong length");
    }
    unary_[i] = Eigen::Map<const Vector>(unary_logpot[i].data(),
                                         static_cast<Eigen::Index>(cards_[i]));
    if (!unary_[i].allFinite()) {
      throw GraphError("unary potential of variable " + std::to_string(i) + " is not finite");
    }
  }

  std::vector<std::vector<std::size_t>> per_var(n);
  factor_edge_offsets_.push_back(0);
  factor_logpot_.reserve(factors_.size());
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    const FactorSpec& spec = factors_[f];
    if (spec.scope.empty()) {
      throw GraphError("factor " + std::to_string(f) + " has an empty scope");
    }
    std::vector<std::size_t> scope_cards;
    std::size_t size = 1;
    for (std::size_t p = 0; p < spec.scope.size(); ++p) {
      const std::size_t v = spec.scope[p];
      if (v >= n) {
        throw GraphError("factor " + std::to_string(f) + " references variable " +
                         std::to_string(v) + " out of range");
      }
      for (std::size_t q = 0; q < p; ++q) {
        if (spec.scope[q] == v) {
          throw GraphError("factor " + std::to_string(f) + " repeats variable " +
                           std::to_string(v));
        }
      }
      scope_cards.push_back(cards_[v]);
      size *= cards_[v];
    }
    if (spec.logpot_table.size() != size) {
      throw GraphError("factor " + std::to_string(f) + " table has " +
                       std::to_string(spec.logpot_table.size()) + " entries, expected " +
                       std::to_string(size));
    }
    Vector table = Eigen::Map<const Vector>(spec.logpot_table.data(),
                                            static_cast<Eigen::Index>(size));
    if (!table.allFinite()) {
      throw GraphError("factor " + std::to_string(f) + " table is not finite");
    }
    factor_logpot_.push_back(std::move(table));
    for (std::size_t p = 0; p < spec.scope.size(); ++p) {
      per_var[spec.scope[p]].push_back(edges_.size());
      edges_.push_back(Edge{spec.scope[p], f, p});
      maps_.emplace_back(scope_cards, p);
    }
    factor_edge_offsets_.push_back(edges_.size());
  }

  var_edge_offsets_.push_back(0);
  for (std::size_t i = 0; i < n; ++i) {
    var_edge_ids_.insert(var_edge_ids_.end(), per_var[i].begin(), per_var[i].end());
    var_edge_offsets_.push_back(var_edge_ids_.size());
  }
}

std::span<const std::size_t> FactorGraph::var_edges(std::size_t var) const {
  return std::span<const std::size_t>(var_edge_ids_)
      .subspan(var_edge_offsets_[var], var_edge_offsets_[var + 1] - var_edge_offsets_[var]);
}

bool FactorGraph::operator==(const FactorGraph& other) const {
  if (cards_ != other.cards_ || factors_.size() != other.factors_.size()) return false;
  for (std::size_t i = 0; i < cards_.size(); ++i) {
    if (unary_[i] != other.unary_[i]) return false;
  }
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    if (factors_[f].scope != other.factors_[f].scope ||
        factors_[f].logpot_table != other.factors_[f].logpot_table) {
      return false;
    }
  }
  return true;
}

std::size_t factor_config_index(std::span<const std::size_t> scope_states,
                                std::span<const std::size_t> scope_cards) {
  if (scope_states.size() != scope_cards.size()) {
    throw GraphError("configuration index: state and cardinality lists differ in length");
  }
  std::size_t index = 0;
  for (std::size_t j = 0; j < scope_states.size(); ++j) {
    if (scope_states[j] >= scope_cards[j]) {
      throw GraphError("configuration index: state " + std::to_string(scope_states[j]) +
                       " out of range at position " + std::to_string(j));
    }
    index = index * scope_cards[j] + scope_states[j];
  }
  return index;
}

std::vector<std::size_t> factor_config_states(std::size_t index,
                                              std::span<const std::size_t> scope_cards) {
  std::size_t total = 1;
  for (std::size_t c : scope_cards) total *= c;
  if (index >= total) {
    throw GraphError("configuration index " + std::to_string(index) + " out of range");
  }
  std::vector<std::size_t> states(scope_cards.size());
  for (std::size_t j = scope_cards.size(); j-- > 0;) {
    states[j] = index % scope_cards[j];
    index /= scope_cards[j];
  }
  return states;
}

void check_labeling(const FactorGraph& graph, const Labeling& labeling) {
  if (labeling.states.size() != graph.num_variables()) {
    throw GraphError("labeling has " + std::to_string(labeling.states.size()) +
                     " entries, graph has " + std::to_string(graph.num_variables()) +
                     " variables");
  }
  for (std::size_t i = 0; i < labeling.states.size(); ++i) {
    if (labeling.states[i] >= graph.cardinality(i)) {
      throw GraphError("labeling state " + std::to_string(labeling.states[i]) +
                       " out of range for variable " + std::to_string(i));
    }
  }
}

std::size_t factor_config_of(const FactorGraph& graph, std::size_t f, const Labeling& labeling) {
  std::size_t index = 0;
  for (std::size_t v : graph.factor(f).scope) {
    index = index * graph.cardinality(v) + labeling.states[v];
  }
  return index;
}

double evaluate_logpot(const FactorGraph& graph, const Labeling& labeling) {
  check_labeling(graph, labeling);
  double total = 0.0;
  for (std::size_t i = 0; i < graph.num_variables(); ++i) {
    total += graph.unary(i)[static_cast<Eigen::Index>(labeling.states[i])];
  }
  for (std::size_t f = 0; f < graph.num_factors(); ++f) {
    total += graph.factor(f).logpot_table[factor_config_of(graph, f, labeling)];
  }
  return total;
}

PrimalState encode_labeling(const FactorGraph& graph, const Labeling& labeling) {
  check_labeling(graph, labeling);
  PrimalState state;
  state.mu_vars.resize(graph.num_variables());
  for (std::size_t i = 0; i < graph.num_variables(); ++i) {
    state.mu_vars[i] = Vector::Zero(static_cast<Eigen::Index>(graph.cardinality(i)));
    state.mu_vars[i][static_cast<Eigen::Index>(labeling.states[i])] = 1.0;
  }
  state.mu_factors.resize(graph.num_factors());
  for (std::size_t f = 0; f < graph.num_factors(); ++f) {
    state.mu_factors[f] = Vector::Zero(static_cast<Eigen::Index>(graph.factor_size(f)));
    state.mu_factors[f][static_cast<Eigen::Index>(factor_config_of(graph, f, labeling))] = 1.0;
  }
  state.upsilon = state.mu_vars;
  return state;
}

}  // namespace lslp
