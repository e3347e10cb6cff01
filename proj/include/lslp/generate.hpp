#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "lslp/factor_graph.hpp"

namespace lslp {

enum class Topology { kChain, kTree, kGrid };
enum class Coupling { kRandom, kSymmetric };

/// Synthetic pairwise model. Chains and trees use `vars`; grids use
/// `rows` x `cols` with 4-neighbour edges.
struct GeneratorSpec {
  Topology topology = Topology::kChain;
  std::size_t vars = 5;
  std::size_t rows = 4;
  std::size_t cols = 4;
  std::size_t states = 2;
  Coupling coupling = Coupling::kRandom;
  /// Pairwise log-potentials are uniform in [-scale, scale].
  double scale = 1.0;
  /// Unary log-potentials are uniform in [-unary_scale, unary_scale].
  double unary_scale = 1.0;
  std::uint64_t seed = 0;
};

Topology parse_topology(const std::string& name);
Coupling parse_coupling(const std::string& name);

FactorGraph generate_model(const GeneratorSpec& spec);

}  // namespace lslp
