#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lslp/admm_solver.hpp"

namespace lslp {

struct OracleReport {
  double logpot = 0.0;
  /// oracle logPot minus solver logPot; never below -1e-9 for a correct oracle.
  double gap = 0.0;
  bool match = false;
};

/// Machine-readable summary of one solve. The JSON form always carries the
/// same keys; `oracle` and `oracle_error` are null when not applicable.
struct RunReport {
  std::string model;
  std::vector<std::size_t> labels;
  double logpot = 0.0;
  SolveStatus status = SolveStatus::kMaxIters;
  SolutionType classification = SolutionType::kApproximate;
  std::size_t iterations = 0;
  Residuals residuals;
  double runtime_ms = 0.0;
  SolverConfig config;
  bool tables_are_log = false;
  std::optional<OracleReport> oracle;
  std::optional<std::string> oracle_error;
};

/// Solver and oracle logPot agree when the gap is within this bound.
inline constexpr double kOracleMatchTolerance = 1e-6;

RunReport make_report(const std::string& model, const SolverResult& result,
                      const SolverConfig& config, double runtime_ms);

void attach_oracle(RunReport& report, double oracle_logpot);

nlohmann::ordered_json to_json(const RunReport& report);
std::string to_json_text(const RunReport& report);

inline constexpr const char* kTraceHeader =
    "iter,lagrangian,r_consistency,r_sphere,d_lambda,d_mu,rho,max_factor_vi";

std::string trace_csv(const std::vector<TraceRecord>& trace);

/// One batch row: a report, or the error that stopped the model from being
/// read or solved.
struct BatchRow {
  std::string model;
  std::optional<RunReport> report;
  std::string error;
};

inline constexpr const char* kBatchHeader =
    "model,status,classification,logpot,iterations,runtime_ms,r_consistency,r_sphere,"
    "stationarity_max,factor_vi_max,oracle_logpot,oracle_gap,oracle_match,labels,error";

/// Label of the trailing row; its numeric cells hold "mean/std".
inline constexpr const char* kAggregateLabel = "aggregate(mean/std)";

/// CSV with one row per model followed by the aggregate row. Mean and
/// population standard deviation cover the rows that produced a report.
std::string batch_csv(const std::vector<BatchRow>& rows);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& values);

}  // namespace lslp
