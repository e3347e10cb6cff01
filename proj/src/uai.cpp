#include "lslp/uai.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace lslp {

ParseError::ParseError(std::size_t token_index, const std::string& message)
    : std::runtime_error("token " + std::to_string(token_index) + ": " + message),
      token_index_(token_index) {}

namespace {

class TokenStream {
 public:
  explicit TokenStream(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size()) {
      while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
      const std::size_t start = i;
      while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
      if (i > start) tokens_.push_back(text.substr(start, i - start));
    }
  }

  std::size_t position() const { return next_; }
  bool done() const { return next_ >= tokens_.size(); }
  std::size_t size() const { return tokens_.size(); }

  std::string_view take(const char* what) {
    if (done()) {
      throw ParseError(next_, std::string("unexpected end of input, expected ") + what);
    }
    return tokens_[next_++];
  }

  std::size_t take_count(const char* what) {
    const std::size_t pos = next_;
    const std::string_view tok = take(what);
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw ParseError(pos, std::string("expected non-negative integer ") + what + ", got '" +
                                std::string(tok) + "'");
    }
    return value;
  }

  double take_real(const char* what) {
    const std::size_t pos = next_;
    const std::string_view tok = take(what);
    // std::from_chars for double is unavailable on older libstdc++; strtod is
    // locale-sensitive but UAI files use '.' as decimal separator anyway.
    const std::string copy(tok);
    char* end = nullptr;
    const double value = std::strtod(copy.c_str(), &end);
    if (end != copy.c_str() + copy.size()) {
      throw ParseError(pos, std::string("expected real ") + what + ", got '" + copy + "'");
    }
    return value;
  }

 private:
  std::vector<std::string_view> tokens_;
  std::size_t next_ = 0;
};

}  // namespace

FactorGraph parse_uai(std::string_view text, const UaiOptions& options) {
  TokenStream in(text);
  {
    const std::size_t pos = in.position();
    const std::string_view preamble = in.take("preamble");
    if (preamble != "MARKOV") {
      throw ParseError(pos, "expected preamble MARKOV, got '" + std::string(preamble) + "'");
    }
  }

  const std::size_t num_vars = in.take_count("variable count");
  std::vector<std::size_t> cards(num_vars);
  for (std::size_t i = 0; i < num_vars; ++i) {
    const std::size_t pos = in.position();
    cards[i] = in.take_count("cardinality");
    if (cards[i] < 1) {
      throw ParseError(pos, "cardinality of variable " + std::to_string(i) + " is < 1");
    }
  }

  const std::size_t num_factors = in.take_count("factor count");
  std::vector<std::vector<std::size_t>> scopes(num_factors);
  std::vector<std::size_t> scope_pos(num_factors);
  for (std::size_t f = 0; f < num_factors; ++f) {
    scope_pos[f] = in.position();
    const std::size_t k = in.take_count("scope size");
    if (k < 1) throw ParseError(scope_pos[f], "factor " + std::to_string(f) + " has empty scope");
    scopes[f].reserve(k);
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t pos = in.position();
      const std::size_t v = in.take_count("scope variable");
      if (v >= num_vars) {
        throw ParseError(pos, "scope variable " + std::to_string(v) + " out of range [0, " +
                                  std::to_string(num_vars) + ")");
      }
      if (std::find(scopes[f].begin(), scopes[f].end(), v) != scopes[f].end()) {
        throw ParseError(pos, "duplicate variable " + std::to_string(v) + " in scope of factor " +
                                  std::to_string(f));
      }
      scopes[f].push_back(v);
    }
  }

  std::vector<std::vector<double>> unary(num_vars);
  for (std::size_t i = 0; i < num_vars; ++i) unary[i].assign(cards[i], 0.0);
  std::vector<FactorSpec> factors;
  for (std::size_t f = 0; f < num_factors; ++f) {
    std::size_t expected = 1;
    for (std::size_t v : scopes[f]) expected *= cards[v];
    const std::size_t pos = in.position();
    const std::size_t length = in.take_count("table length");
    if (length != expected) {
      throw ParseError(pos, "table of factor " + std::to_string(f) + " has length " +
                                std::to_string(length) + ", expected " +
                                std::to_string(expected));
    }
    std::vector<double> table(length);
    for (std::size_t t = 0; t < length; ++t) {
      const std::size_t entry_pos = in.position();
      const double v = in.take_real("table entry");
      if (!std::isfinite(v) || (!options.tables_are_log && v < 0.0)) {
        throw ParseError(entry_pos, "invalid table entry " + std::to_string(v) + " in factor " +
                                        std::to_string(f));
      }
      const double logv = options.tables_are_log ? v : std::log(v);
      table[t] = std::max(logv, options.clamp_floor);
    }
    if (scopes[f].size() == 1) {
      std::vector<double>& target = unary[scopes[f][0]];
      for (std::size_t s = 0; s < length; ++s) target[s] += table[s];
    } else {
      factors.push_back(FactorSpec{std::move(scopes[f]), std::move(table)});
    }
  }
  if (!in.done()) {
    throw ParseError(in.position(), "unexpected trailing tokens (" +
                                        std::to_string(in.size() - in.position()) + " extra)");
  }
  return FactorGraph(std::move(cards), std::move(unary), std::move(factors));
}

FactorGraph parse_uai_file(const std::string& path, const UaiOptions& options) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open model file: " + path);
  std::stringstream buffer;
  buffer << file.rdbuf();
  return parse_uai(buffer.str(), options);
}

namespace {

void append_real(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

std::string serialize_uai(const FactorGraph& graph) {
  const std::size_t n = graph.num_variables();
  std::string out = "MARKOV\n" + std::to_string(n) + "\n";
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += std::to_string(graph.cardinality(i));
  }
  out += "\n" + std::to_string(n + graph.num_factors()) + "\n";
  for (std::size_t i = 0; i < n; ++i) out += "1 " + std::to_string(i) + "\n";
  for (std::size_t f = 0; f < graph.num_factors(); ++f) {
    const auto& scope = graph.factor(f).scope;
    out += std::to_string(scope.size());
    for (std::size_t v : scope) out += " " + std::to_string(v);
    out += '\n';
  }
  for (std::size_t i = 0; i < n; ++i) {
    out += "\n" + std::to_string(graph.cardinality(i)) + "\n";
    const Vector& theta = graph.unary(i);
    for (Eigen::Index s = 0; s < theta.size(); ++s) {
      if (s) out += ' ';
      append_real(out, std::exp(theta[s]));
    }
    out += '\n';
  }
  for (std::size_t f = 0; f < graph.num_factors(); ++f) {
    const auto& table = graph.factor(f).logpot_table;
    out += "\n" + std::to_string(table.size()) + "\n";
    for (std::size_t t = 0; t < table.size(); ++t) {
      if (t) out += ' ';
      append_real(out, std::exp(table[t]));
    }
    out += '\n';
  }
  return out;
}

void write_uai_file(const FactorGraph& graph, const std::string& path) {
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot write model file: " + path);
  file << serialize_uai(graph);
}

}  // namespace lslp
