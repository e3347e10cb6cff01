#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lslp/uai.hpp"

namespace fs = std::filesystem;
using namespace lslp;

namespace {

// Fresh scratch directory per test binary run.
const fs::path& scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("lslp_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args, const std::string& stdout_name = "out.txt") {
  const std::string cmd = std::string(LSLP_CLI_PATH) + " " + args + " > " +
                          (scratch() / stdout_name).string() + " 2> " +
                          (scratch() / "err.txt").string();
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string path(const std::string& name) { return (scratch() / name).string(); }

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_CASE("gen writes parseable models") {
  CHECK(run("gen --topology chain --vars 5 --states 2 --seed 7 --out " + path("chain.uai")) == 0);
  const FactorGraph chain = parse_uai_file(path("chain.uai"));
  CHECK(chain.num_variables() == 5);
  CHECK(chain.num_factors() == 4);

  CHECK(run("gen --topology grid --rows 4 --cols 4 --out " + path("grid.uai")) == 0);
  const FactorGraph grid = parse_uai_file(path("grid.uai"));
  CHECK(grid.num_variables() == 16);
  CHECK(grid.num_factors() == 24);

  CHECK(run("gen --topology tree --vars 6 --states 3 --coupling symmetric --seed 2 --out " +
            path("sym.uai")) == 0);
  const FactorGraph sym = parse_uai_file(path("sym.uai"));
  for (std::size_t f = 0; f < sym.num_factors(); ++f) {
    const auto& t = sym.factor(f).logpot_table;
    for (std::size_t s = 0; s < 3; ++s)
      for (std::size_t u = 0; u < 3; ++u) CHECK(t[s * 3 + u] == t[u * 3 + s]);
  }

  CHECK(run("gen --topology ring") == 1);
  CHECK(run("gen --topology grid --rows 0") == 1);
}

TEST_CASE("solve reports, exit codes and oracle agreement") {
  {
    std::ofstream out(path("dominant.uai"));
    out << "MARKOV 3 2 2 2 5\n1 0\n1 1\n1 2\n2 0 1\n2 1 2\n"
           "2 1 100000\n2 100000 1\n2 1 100000\n4 1 1 1 1\n4 1 1 1 1\n";
  }
  CHECK(run("solve --model " + path("dominant.uai") + " --oracle --trace " + path("t.csv")) == 0);
  const auto j = nlohmann::json::parse(slurp(scratch() / "out.txt"));
  CHECK(j["status"] == "Converged");
  CHECK(j["classification"] == "Valid");
  CHECK(j["labels"] == nlohmann::json::array({1, 0, 1}));
  CHECK(j["oracle"]["match"] == true);
  CHECK(std::abs(j["oracle"]["gap"].get<double>()) <= 1e-9);
  CHECK(j["oracle_error"].is_null());
  const std::string trace = slurp(scratch() / "t.csv");
  CHECK(trace.rfind("iter,lagrangian,r_consistency,r_sphere,d_lambda,d_mu,rho,max_factor_vi\n", 0) == 0);
  CHECK(count_lines(trace) == j["iterations"].get<std::size_t>() + 1);

  CHECK(run("solve --model " + path("dominant.uai") + " --max-iter 0") == 2);
  CHECK(nlohmann::json::parse(slurp(scratch() / "out.txt"))["status"] == "MaxIters");

  CHECK(run("solve --model " + path("dominant.uai") + " --output " + path("r.json")) == 0);
  CHECK(nlohmann::json::parse(slurp(scratch() / "r.json"))["model"] == path("dominant.uai"));

  CHECK(run("solve --model " + path("missing.uai")) == 1);
  CHECK_FALSE(slurp(scratch() / "err.txt").empty());
  CHECK(run("solve --model " + path("dominant.uai") + " --eta 0.5") == 1);
  CHECK(run("solve") == 1);
}

TEST_CASE("oracle limit is reported inside the json") {
  CHECK(run("gen --topology chain --vars 12 --out " + path("long.uai")) == 0);
  const int code = run("solve --model " + path("long.uai") + " --oracle --oracle-limit 100");
  CHECK((code == 0 || code == 2));
  const auto j = nlohmann::json::parse(slurp(scratch() / "out.txt"));
  CHECK(j["oracle"].is_null());
  CHECK(j["oracle_error"].is_string());
}

TEST_CASE("parallel workers give byte-identical reports") {
  CHECK(run("gen --topology grid --seed 5 --out " + path("pg.uai")) == 0);
  CHECK(run("solve --no-timing --model " + path("pg.uai"), "p1.json") == 0);
  CHECK(run("solve --no-timing --parallel 2 --model " + path("pg.uai"), "p2.json") == 0);
  CHECK(run("solve --no-timing --parallel 8 --model " + path("pg.uai"), "p8.json") == 0);
  const std::string one = slurp(scratch() / "p1.json");
  CHECK(one == slurp(scratch() / "p2.json"));
  CHECK(one == slurp(scratch() / "p8.json"));
}

TEST_CASE("batch") {
  const fs::path good = scratch() / "good";
  const fs::path empty = scratch() / "empty";
  const fs::path mixed = scratch() / "mixed";
  fs::create_directories(good);
  fs::create_directories(empty);
  fs::create_directories(mixed);
  for (int s = 0; s < 3; ++s) {
    CHECK(run("gen --vars 4 --seed " + std::to_string(s) + " --out " + (good / ("m" + std::to_string(2 - s) + ".uai")).string()) == 0);
  }
  CHECK(run("batch --dir " + good.string() + " --oracle --jobs 2") == 0);
  const std::string csv = slurp(scratch() / "out.txt");
  CHECK(count_lines(csv) == 5);
  CHECK(csv.find("m0.uai") < csv.find("m1.uai"));
  CHECK(csv.find("m1.uai") < csv.find("m2.uai"));
  CHECK(csv.find("aggregate") != std::string::npos);

  CHECK(run("batch --dir " + empty.string()) == 0);
  CHECK(count_lines(slurp(scratch() / "out.txt")) == 2);

  fs::copy_file(good / "m0.uai", mixed / "a.uai");
  {
    std::ofstream(mixed / "b.uai") << "MARKOV 1 2 1 1 0 3 1 1 1\n";
  }
  CHECK(run("batch --dir " + mixed.string()) == 1);
  const std::string mixed_csv = slurp(scratch() / "out.txt");
  CHECK(count_lines(mixed_csv) == 4);
  CHECK(mixed_csv.find(",Error,") != std::string::npos);

  CHECK(run("batch --dir " + (scratch() / "nope").string()) == 1);
}
