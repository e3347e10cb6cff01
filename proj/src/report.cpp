#include "lslp/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace lslp {

RunReport make_report(const std::string& model, const SolverResult& result,
                      const SolverConfig& config, double runtime_ms) {
  RunReport report;
  report.model = model;
  report.labels = result.labeling.states;
  report.logpot = result.logpot;
  report.status = result.status;
  report.classification = result.classification.type;
  report.iterations = result.iterations;
  report.residuals = result.residuals;
  report.runtime_ms = runtime_ms;
  report.config = config;
  return report;
}

void attach_oracle(RunReport& report, double oracle_logpot) {
  OracleReport oracle;
  oracle.logpot = oracle_logpot;
  oracle.gap = oracle_logpot - report.logpot;
  oracle.match = std::abs(oracle.gap) <= kOracleMatchTolerance;
  report.oracle = oracle;
  report.oracle_error.reset();
}

nlohmann::ordered_json to_json(const RunReport& report) {
  nlohmann::ordered_json j;
  j["model"] = report.model;
  j["labels"] = report.labels;
  j["logpot"] = report.logpot;
  j["status"] = std::string(to_string(report.status));
  j["classification"] = std::string(to_string(report.classification));
  j["iterations"] = report.iterations;
  j["residuals"] = {
      {"consistency", report.residuals.consistency},
      {"sphere", report.residuals.sphere},
      {"stationarity_max", report.residuals.stationarity_max},
      {"factor_vi_max", report.residuals.factor_vi_max},
  };
  j["runtime_ms"] = report.runtime_ms;
  const SolverConfig& c = report.config;
  j["config"] = {
      {"epsilon", c.epsilon},
      {"rho0", c.rho0},
      {"eta", c.eta},
      {"rho_upper", c.rho_upper},
      {"fixed_rho", c.fixed_rho ? nlohmann::ordered_json(*c.fixed_rho) : nlohmann::ordered_json()},
      {"stop_tol", c.stop_tol},
      {"max_iter", c.max_iter},
      {"seed", c.seed},
      {"jitter", c.init_jitter},
      {"qp_tolerance", c.qp.tolerance},
      {"qp_max_iter", c.qp.max_iterations},
      {"tables_are_log", report.tables_are_log},
  };
  if (report.oracle) {
    j["oracle"] = {
        {"logpot", report.oracle->logpot},
        {"gap", report.oracle->gap},
        {"match", report.oracle->match},
    };
  } else {
    j["oracle"] = nullptr;
  }
  j["oracle_error"] =
      report.oracle_error ? nlohmann::ordered_json(*report.oracle_error) : nlohmann::ordered_json();
  return j;
}

std::string to_json_text(const RunReport& report) { return to_json(report).dump(2) + "\n"; }

namespace {

std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_cell(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

std::string trace_csv(const std::vector<TraceRecord>& trace) {
  std::string out = std::string(kTraceHeader) + "\n";
  for (const TraceRecord& r : trace) {
    out += std::to_string(r.iter) + "," + real(r.lagrangian) + "," + real(r.r_consistency) + "," +
           real(r.r_sphere) + "," + real(r.d_lambda) + "," + real(r.d_mu) + "," + real(r.rho) +
           "," + real(r.max_factor_vi) + "\n";
  }
  return out;
}

MeanStd mean_std(const std::vector<double>& values) {
  if (values.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan};
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

std::string batch_csv(const std::vector<BatchRow>& rows) {
  std::string out = std::string(kBatchHeader) + "\n";
  std::vector<double> logpots;
  std::vector<double> iterations;
  std::vector<double> runtimes;
  for (const BatchRow& row : rows) {
    out += csv_cell(row.model) + ",";
    if (!row.report) {
      out += "Error,,,,,,,,,,,,," + csv_cell(row.error) + "\n";
      continue;
    }
    const RunReport& r = *row.report;
    logpots.push_back(r.logpot);
    iterations.push_back(static_cast<double>(r.iterations));
    runtimes.push_back(r.runtime_ms);
    std::string labels;
    for (std::size_t i = 0; i < r.labels.size(); ++i) {
      if (i) labels += ' ';
      labels += std::to_string(r.labels[i]);
    }
    out += std::string(to_string(r.status)) + "," + std::string(to_string(r.classification)) +
           "," + real(r.logpot) + "," + std::to_string(r.iterations) + "," + real(r.runtime_ms) +
           "," + real(r.residuals.consistency) + "," + real(r.residuals.sphere) + "," +
           real(r.residuals.stationarity_max) + "," + real(r.residuals.factor_vi_max) + ",";
    if (r.oracle) {
      out += real(r.oracle->logpot) + "," + real(r.oracle->gap) + "," +
             (r.oracle->match ? "true" : "false");
    } else {
      out += ",,";
    }
    out += "," + labels + "," + csv_cell(r.oracle_error.value_or(row.error)) + "\n";
  }
  auto cell = [](const std::vector<double>& values) {
    const MeanStd ms = mean_std(values);
    return real(ms.mean) + "/" + real(ms.std);
  };
  out += std::string(kAggregateLabel) + ",n=" + std::to_string(logpots.size()) + ",," +
         cell(logpots) + "," + cell(iterations) + "," + cell(runtimes) + ",,,,,,,,,\n";
  return out;
}

}  // namespace lslp
