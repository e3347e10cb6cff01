#include "lslp/generate.hpp"

#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace lslp {

Topology parse_topology(const std::string& name) {
  if (name == "chain") return Topology::kChain;
  if (name == "tree") return Topology::kTree;
  if (name == "grid") return Topology::kGrid;
  throw std::invalid_argument("unknown topology '" + name + "' (chain|tree|grid)");
}

Coupling parse_coupling(const std::string& name) {
  if (name == "random") return Coupling::kRandom;
  if (name == "symmetric") return Coupling::kSymmetric;
  throw std::invalid_argument("unknown coupling '" + name + "' (random|symmetric)");
}

FactorGraph generate_model(const GeneratorSpec& spec) {
  if (spec.states < 1) throw std::invalid_argument("states must be >= 1");
  if (spec.scale < 0.0 || spec.unary_scale < 0.0) {
    throw std::invalid_argument("scales must be non-negative");
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  std::size_t n = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  switch (spec.topology) {
    case Topology::kChain:
      if (spec.vars < 1) throw std::invalid_argument("chain needs at least one variable");
      n = spec.vars;
      for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
      break;
    case Topology::kTree:
      if (spec.vars < 1) throw std::invalid_argument("tree needs at least one variable");
      n = spec.vars;
      for (std::size_t i = 1; i < n; ++i) {
        std::uniform_int_distribution<std::size_t> parent(0, i - 1);
        edges.emplace_back(parent(rng), i);
      }
      break;
    case Topology::kGrid:
      if (spec.rows < 1 || spec.cols < 1) throw std::invalid_argument("grid needs rows, cols >= 1");
      n = spec.rows * spec.cols;
      for (std::size_t r = 0; r < spec.rows; ++r) {
        for (std::size_t c = 0; c < spec.cols; ++c) {
          const std::size_t v = r * spec.cols + c;
          if (c + 1 < spec.cols) edges.emplace_back(v, v + 1);
          if (r + 1 < spec.rows) edges.emplace_back(v, v + spec.cols);
        }
      }
      break;
  }

  std::vector<std::size_t> cards(n, spec.states);
  std::vector<std::vector<double>> unary(n, std::vector<double>(spec.states));
  for (auto& theta : unary) {
    for (double& v : theta) v = spec.unary_scale * unit(rng);
  }
  const std::size_t k = spec.states;
  std::vector<FactorSpec> factors;
  factors.reserve(edges.size());
  for (const auto& [a, b] : edges) {
    FactorSpec factor{{a, b}, std::vector<double>(k * k)};
    for (std::size_t s = 0; s < k; ++s) {
      for (std::size_t t = 0; t < k; ++t) {
        if (spec.coupling == Coupling::kSymmetric && t < s) {
          factor.logpot_table[s * k + t] = factor.logpot_table[t * k + s];
        } else {
          factor.logpot_table[s * k + t] = spec.scale * unit(rng);
        }
      }
    }
    factors.push_back(std::move(factor));
  }
  return FactorGraph(std::move(cards), std::move(unary), std::move(factors));
}

}  // namespace lslp
