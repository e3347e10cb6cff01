#pragma once

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

#include "lslp/factor_graph.hpp"

namespace lslp {

/// Error raised while reading a UAI MARKOV file. `token_index` is the
/// zero-based position of the offending token in the whitespace-separated
/// stream (or the stream length when input ended early).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t token_index, const std::string& message);
  std::size_t token_index() const { return token_index_; }

 private:
  std::size_t token_index_;
};

struct UaiOptions {
  /// Lower bound applied to every log-potential so zero entries stay finite.
  double clamp_floor = std::log(1e-10);
  /// Treat table entries as log-potentials instead of raw function values.
  bool tables_are_log = false;
};

FactorGraph parse_uai(std::string_view text, const UaiOptions& options = {});
FactorGraph parse_uai_file(const std::string& path, const UaiOptions& options = {});

/// Writes the graph as a MARKOV file. Every variable's unary potential is
/// emitted as a scope-1 factor ahead of the higher-order factors.
std::string serialize_uai(const FactorGraph& graph);
void write_uai_file(const FactorGraph& graph, const std::string& path);

}  // namespace lslp
