#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "lslp/uai.hpp"
#include "test_support.hpp"

using namespace lslp;

namespace {

std::string fixture(const char* name) { return std::string(LSLP_FIXTURE_DIR) + "/" + name; }

std::size_t error_token(const std::string& path) {
  try {
    parse_uai_file(path);
  } catch (const ParseError& e) {
    return e.token_index();
  }
  FAIL("expected a ParseError from " << path);
  return 0;
}

void check_logs(const Vector& got, std::initializer_list<double> raw) {
  REQUIRE(got.size() == static_cast<Eigen::Index>(raw.size()));
  Eigen::Index k = 0;
  for (double v : raw) CHECK(got(k++) == doctest::Approx(std::log(v)).epsilon(1e-15));
}

}  // namespace

TEST_CASE("inline single-variable model") {
  const FactorGraph g = parse_uai("MARKOV 1 2 1 1 0 2 0.6 0.4");
  CHECK(g.num_variables() == 1);
  CHECK(g.cardinality(0) == 2);
  CHECK(g.num_factors() == 0);
  CHECK(g.unary(0)(0) == std::log(0.6));
  CHECK(g.unary(0)(1) == std::log(0.4));
}

TEST_CASE("fixture corpus: well-formed models") {
  SUBCASE("single variable") {
    const FactorGraph g = parse_uai_file(fixture("01_single_variable.uai"));
    CHECK(g.num_variables() == 1);
    check_logs(g.unary(0), {0.6, 0.4});
  }
  SUBCASE("binary pair") {
    const FactorGraph g = parse_uai_file(fixture("02_binary_pair.uai"));
    REQUIRE(g.num_factors() == 1);
    CHECK(g.factor(0).scope == std::vector<std::size_t>{0, 1});
    check_logs(g.factor_logpot(0), {1.0, 2.0, 3.0, 4.0});
    CHECK(g.unary(0).isZero());
    CHECK(g.consistency(0).state_of(2) == 1);
  }
  SUBCASE("repeated unary factors are summed") {
    const FactorGraph g = parse_uai_file(fixture("03_repeated_unary.uai"));
    CHECK(g.num_factors() == 0);
    check_logs(g.unary(0), {2.0, 4.0, 2.0});
  }
  SUBCASE("variable outside every factor keeps a zero unary") {
    const FactorGraph g = parse_uai_file(fixture("04_isolated_variable.uai"));
    CHECK(g.num_variables() == 3);
    CHECK(g.degree(2) == 0);
    CHECK(g.unary(2).isZero());
  }
  SUBCASE("zero entries are clamped") {
    const FactorGraph g = parse_uai_file(fixture("05_zero_entry.uai"));
    CHECK(g.unary(0)(0) == std::log(1e-10));
    CHECK(g.unary(0)(1) == 0.0);
    UaiOptions opts;
    opts.clamp_floor = -5.0;
    CHECK(parse_uai_file(fixture("05_zero_entry.uai"), opts).unary(0)(0) == -5.0);
  }
  SUBCASE("triple factor with mixed cardinalities") {
    const FactorGraph g = parse_uai_file(fixture("06_triple_mixed_cards.uai"));
    CHECK(g.cardinalities() == std::vector<std::size_t>{2, 3, 2});
    REQUIRE(g.num_factors() == 1);
    CHECK(g.factor(0).scope == std::vector<std::size_t>{2, 0, 1});
    check_logs(g.unary(1), {0.5, 1.0, 2.0});
    // x = (1, 2, 1): config index 1*6 + 1*3 + 2 = 11, table entry 12.
    CHECK(evaluate_logpot(g, Labeling{{1, 2, 1}}) ==
          doctest::Approx(std::log(12.0) + std::log(2.0)));
  }
  SUBCASE("no factors") {
    const FactorGraph g = parse_uai_file(fixture("07_no_factors.uai"));
    CHECK(g.cardinalities() == std::vector<std::size_t>{2, 3});
    CHECK(g.num_factors() == 0);
    CHECK(g.unary(1).isZero());
  }
  SUBCASE("layout is whitespace-insensitive") {
    const FactorGraph g = parse_uai_file(fixture("08_free_layout.uai"));
    check_logs(g.unary(0), {0.25, 0.75});
    REQUIRE(g.num_factors() == 1);
    CHECK(g.factor(0).scope == std::vector<std::size_t>{1, 0});
    check_logs(g.factor_logpot(0), {0.25, 2.0, 0.1, 2.5});
  }
}

TEST_CASE("fixture corpus: every parse error names its token") {
  CHECK(error_token(fixture("09_bad_preamble.uai")) == 0);
  CHECK(error_token(fixture("10_truncated_table.uai")) == 12);
  CHECK(error_token(fixture("11_zero_cardinality.uai")) == 3);
  CHECK(error_token(fixture("12_scope_out_of_range.uai")) == 6);
  CHECK(error_token(fixture("13_duplicate_scope.uai")) == 7);
  CHECK(error_token(fixture("14_table_length_mismatch.uai")) == 8);
  CHECK(error_token(fixture("15_negative_entry.uai")) == 8);
  CHECK(error_token(fixture("16_trailing_tokens.uai")) == 9);
  CHECK(error_token(fixture("17_non_integer_cardinality.uai")) == 2);
  CHECK(error_token(fixture("18_empty_scope.uai")) == 5);
  CHECK(error_token(fixture("19_malformed_real.uai")) == 7);
  CHECK(error_token(fixture("20_infinite_entry.uai")) == 7);
}

TEST_CASE("scope index beyond the variable count") {
  CHECK_THROWS_AS(parse_uai("MARKOV 1 2 1 2 0 1 4 1 1 1 1"), ParseError);
}

TEST_CASE("missing file is not a parse error") {
  CHECK_THROWS_AS(parse_uai_file(fixture("does_not_exist.uai")), std::runtime_error);
}

TEST_CASE("log-domain tables") {
  UaiOptions opts;
  opts.tables_are_log = true;
  const FactorGraph g = parse_uai("MARKOV 1 2 1 1 0 2 -1.5 3", opts);
  CHECK(g.unary(0)(0) == -1.5);
  CHECK(g.unary(0)(1) == 3.0);
}

TEST_CASE("serialize then parse") {
  SUBCASE("single variable") {
    const FactorGraph g = parse_uai("MARKOV 1 2 1 1 0 2 0.6 0.4");
    const FactorGraph back = parse_uai(serialize_uai(g));
    CHECK(std::abs(back.unary(0)(0) - g.unary(0)(0)) <= 1e-12);
    CHECK(std::abs(back.unary(0)(1) - g.unary(0)(1)) <= 1e-12);
  }
  SUBCASE("no factors emits one unary factor per variable") {
    const FactorGraph g({2, 3}, {}, {});
    const std::string text = serialize_uai(g);
    const FactorGraph back = parse_uai(text);
    CHECK(back.cardinalities() == g.cardinalities());
    CHECK(text.rfind("MARKOV\n2\n2 3\n2\n1 0\n1 1\n", 0) == 0);
  }
  SUBCASE("random graphs keep their logPot on every labeling") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 20; ++trial) {
      const FactorGraph g = testing::random_graph(rng, 5, 3, 5, 4.0);
      const FactorGraph back = parse_uai(serialize_uai(g));
      CHECK(back.num_factors() == g.num_factors());
      for (int k = 0; k < 20; ++k) {
        const Labeling x = testing::random_labeling(rng, g);
        CHECK(std::abs(evaluate_logpot(back, x) - evaluate_logpot(g, x)) <= 1e-9);
      }
    }
  }
}
