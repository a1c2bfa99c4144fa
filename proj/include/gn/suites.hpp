#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gn/config.hpp"

namespace gn {

struct CheckResult {
  std::string name;
  std::string anchor;  // role tag of the verified statement, e.g. "gaussian/shift-identity"
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;
  std::vector<std::string> files;  // tables written under the output directory
  bool passed() const;
};

// Runs one named suite, writing its tables into cfg.out_dir.
SuiteReport run_suite(const std::string& name, const ExperimentConfig& cfg);

// Runs cfg.suite ("all" expands to every suite, in the fixed order of
// suite_names()). With `parallel` the suites run concurrently; the report
// order does not change.
std::vector<SuiteReport> run_suites(const ExperimentConfig& cfg, bool parallel);

inline constexpr int kReportSchemaVersion = 1;

// Deterministic JSON: config echo, seed, per-check rows and residual summary.
nlohmann::ordered_json make_report(const ExperimentConfig& cfg, const std::vector<SuiteReport>& suites);
nlohmann::ordered_json config_echo(const ExperimentConfig& cfg);

}  // namespace gn
