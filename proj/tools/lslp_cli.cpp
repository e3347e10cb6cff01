#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lslp/admm_solver.hpp"
#include "lslp/generate.hpp"
#include "lslp/oracle.hpp"
#include "lslp/parallel.hpp"
#include "lslp/report.hpp"
#include "lslp/uai.hpp"

namespace fs = std::filesystem;
using namespace lslp;

namespace {

constexpr int kExitConverged = 0;
constexpr int kExitError = 1;
constexpr int kExitMaxIters = 2;

struct SolveFlags {
  SolverConfig config;
  double fixed_rho = 0.0;
  bool oracle = false;
  std::size_t oracle_limit = oracle::OracleLimit{}.max_total_configs;
  bool tables_are_log = false;
  bool no_timing = false;
};

void add_solve_flags(CLI::App& app, SolveFlags& f) {
  app.add_option("--rho0", f.config.rho0, "initial penalty")->capture_default_str();
  app.add_option("--eta", f.config.eta, "penalty growth factor")->capture_default_str();
  app.add_option("--rho-upper", f.config.rho_upper, "penalty cap")->capture_default_str();
  app.add_option("--epsilon", f.config.epsilon, "perturbation")->capture_default_str();
  app.add_option("--tol", f.config.stop_tol, "stopping threshold")->capture_default_str();
  app.add_option("--max-iter", f.config.max_iter, "iteration budget")->capture_default_str();
  app.add_option("--seed", f.config.seed, "initialization seed")->capture_default_str();
  app.add_option("--jitter", f.config.init_jitter, "initial jitter amplitude")
      ->capture_default_str();
  app.add_option("--fixed-rho", f.fixed_rho, "keep the penalty at this value");
  app.add_flag("--oracle", f.oracle, "compare against brute-force MAP");
  app.add_option("--oracle-limit", f.oracle_limit, "max joint configurations for the oracle")
      ->capture_default_str();
  app.add_option("--parallel", f.config.workers, "worker threads for factor updates")
      ->capture_default_str();
  app.add_flag("--tables-are-log", f.tables_are_log, "table entries are log-potentials");
  app.add_flag("--no-timing", f.no_timing, "report runtime_ms as 0 for reproducible output");
}

void finalize(CLI::App& app, SolveFlags& f) {
  if (app.count("--fixed-rho") > 0) f.config.fixed_rho = f.fixed_rho;
  if (f.config.workers == 0) throw std::invalid_argument("--parallel must be >= 1");
  f.config.validate();
}

/// Solves one parsed model. Trace is kept only when asked for.
RunReport run_model(const std::string& path, const FactorGraph& graph, const SolveFlags& f,
                    std::vector<TraceRecord>* trace) {
  SolverConfig config = f.config;
  config.record_trace = trace != nullptr;
  const auto start = std::chrono::steady_clock::now();
  SolverResult result = solve(graph, config);
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  RunReport report = make_report(path, result, f.config, f.no_timing ? 0.0 : ms);
  report.tables_are_log = f.tables_are_log;
  if (f.oracle) {
    try {
      attach_oracle(report, oracle::brute_force_map(graph, {f.oracle_limit}).logpot);
    } catch (const oracle::TooLargeError& e) {
      report.oracle_error = e.what();
    }
  }
  if (trace) *trace = std::move(result.trace);
  return report;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

int cmd_solve(const std::string& model, const SolveFlags& f, const std::string& trace_path,
              const std::string& output) {
  const FactorGraph graph = parse_uai_file(model, {.tables_are_log = f.tables_are_log});
  std::vector<TraceRecord> trace;
  const RunReport report = run_model(model, graph, f, trace_path.empty() ? nullptr : &trace);
  if (!trace_path.empty()) write_text(trace_path, trace_csv(trace));
  const std::string json = to_json_text(report);
  if (output.empty()) {
    std::cout << json;
  } else {
    write_text(output, json);
  }
  return report.status == SolveStatus::kConverged ? kExitConverged : kExitMaxIters;
}

int cmd_batch(const std::string& dir, const SolveFlags& f, std::size_t jobs,
              const std::string& output) {
  if (!fs::is_directory(dir)) throw std::runtime_error("'" + dir + "' is not a directory");
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".uai") {
      files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());

  std::vector<BatchRow> rows(files.size());
  std::vector<char> parsed(files.size(), 0);
  parallel_for(files.size(), jobs, [&](std::size_t i) {
    rows[i].model = files[i];
    std::optional<FactorGraph> graph;
    try {
      graph.emplace(parse_uai_file(files[i], {.tables_are_log = f.tables_are_log}));
      parsed[i] = 1;
    } catch (const std::exception& e) {
      rows[i].error = e.what();
      return;
    }
    try {
      rows[i].report = run_model(files[i], *graph, f, nullptr);
    } catch (const std::exception& e) {
      rows[i].error = e.what();
    }
  });

  const std::string csv = batch_csv(rows);
  if (output.empty()) {
    std::cout << csv;
  } else {
    write_text(output, csv);
  }
  const bool all_parsed = std::all_of(parsed.begin(), parsed.end(), [](char p) { return p; });
  for (const BatchRow& row : rows) {
    if (!row.report) std::cerr << "lslp: " << row.model << ": " << row.error << "\n";
  }
  return all_parsed ? 0 : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MAP inference by perturbed ADMM over the local polytope and a sphere"};
  app.require_subcommand(1);

  SolveFlags solve_flags;
  std::string model;
  std::string trace_path;
  std::string solve_output;
  CLI::App* solve_cmd = app.add_subcommand("solve", "solve one UAI model, JSON report");
  solve_cmd->add_option("--model", model, "UAI MARKOV file")->required();
  solve_cmd->add_option("--trace", trace_path, "write the per-iteration CSV trace here");
  solve_cmd->add_option("--output", solve_output, "JSON path (default stdout)");
  add_solve_flags(*solve_cmd, solve_flags);

  SolveFlags batch_flags;
  std::string dir;
  std::string batch_output;
  std::size_t jobs = 1;
  CLI::App* batch_cmd = app.add_subcommand("batch", "solve every .uai file in a directory, CSV");
  batch_cmd->add_option("--dir", dir, "directory of .uai files")->required();
  batch_cmd->add_option("--output", batch_output, "CSV path (default stdout)");
  batch_cmd->add_option("--jobs", jobs, "models solved concurrently")->capture_default_str();
  add_solve_flags(*batch_cmd, batch_flags);

  GeneratorSpec gen;
  std::string topology = "chain";
  std::string coupling = "random";
  std::string gen_out;
  CLI::App* gen_cmd = app.add_subcommand("gen", "write a synthetic pairwise model");
  gen_cmd->add_option("--topology", topology, "chain|tree|grid")->capture_default_str();
  gen_cmd->add_option("--vars", gen.vars, "variables (chain, tree)")->capture_default_str();
  gen_cmd->add_option("--rows", gen.rows, "grid rows")->capture_default_str();
  gen_cmd->add_option("--cols", gen.cols, "grid columns")->capture_default_str();
  gen_cmd->add_option("--states", gen.states, "states per variable")->capture_default_str();
  gen_cmd->add_option("--coupling", coupling, "random|symmetric")->capture_default_str();
  gen_cmd->add_option("--scale", gen.scale, "pairwise log-potential range")->capture_default_str();
  gen_cmd->add_option("--unary-scale", gen.unary_scale, "unary log-potential range")
      ->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "generator seed")->capture_default_str();
  gen_cmd->add_option("--out", gen_out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (*solve_cmd) {
      finalize(*solve_cmd, solve_flags);
      return cmd_solve(model, solve_flags, trace_path, solve_output);
    }
    if (*batch_cmd) {
      finalize(*batch_cmd, batch_flags);
      if (jobs == 0) throw std::invalid_argument("--jobs must be >= 1");
      return cmd_batch(dir, batch_flags, jobs, batch_output);
    }
    gen.topology = parse_topology(topology);
    gen.coupling = parse_coupling(coupling);
    const std::string text = serialize_uai(generate_model(gen));
    if (gen_out.empty()) {
      std::cout << text;
    } else {
      write_text(gen_out, text);
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "lslp: " << e.what() << "\n";
    return kExitError;
  }
}
