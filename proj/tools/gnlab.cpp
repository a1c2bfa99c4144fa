#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "gn/config.hpp"
#include "gn/suites.hpp"

namespace {

constexpr int kExitPass = 0, kExitFail = 1, kExitConfig = 2;

int run(const std::string& config_path, const std::string& suite, const std::string& out, bool parallel,
        int verbosity) {
  gn::ExperimentConfig cfg;
  try {
    cfg = config_path.empty() ? gn::ExperimentConfig{} : gn::load_config(config_path);
    if (!suite.empty()) cfg.suite = suite;
    if (!out.empty()) cfg.out_dir = out;
    cfg.validate();
  } catch (const gn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  std::vector<gn::SuiteReport> reports;
  try {
    reports = gn::run_suites(cfg, parallel);
  } catch (const gn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  const auto report = gn::make_report(cfg, reports);
  const auto path = std::filesystem::path(cfg.out_dir) / cfg.report;
  std::ofstream f(path);
  if (!f) {
    std::cerr << "cannot write " << path << '\n';
    return kExitFail;
  }
  f << report.dump(2) << '\n';

  bool ok = true;
  for (auto& s : reports) {
    ok = ok && s.passed();
    if (verbosity > 0 || !s.passed()) {
      for (auto& c : s.checks)
        if (verbosity > 0 || !c.passed)
          std::printf("%-4s %-12s %-44s residual %.3e tol %.1e  %s\n", c.passed ? "ok" : "FAIL", s.suite.c_str(),
                      c.name.c_str(), c.residual, c.tolerance, c.detail.c_str());
    }
  }
  std::printf("%s: %d checks, report %s\n", ok ? "pass" : "FAIL",
              static_cast<int>(report["summary"]["checks"]), path.string().c_str());
  return ok ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grassmann / RG numerics lab"};
  app.require_subcommand(1);

  std::string config_path, suite, out;
  bool parallel = false;
  int verbosity = 0;
  auto* run_cmd = app.add_subcommand("run", "run verification suites and write tables");
  run_cmd->add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
  run_cmd->add_option("--suite", suite, "identities | covariance | polymer | flow | correlators | all");
  run_cmd->add_option("--out", out, "output directory");
  run_cmd->add_flag("--parallel", parallel, "run suites concurrently");
  run_cmd->add_flag("-v,--verbose", verbosity, "print every check");

  auto* ref_cmd = app.add_subcommand("config-reference", "print every configuration key with its default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  if (*ref_cmd) {
    std::cout << "# Configuration reference\n" << gn::config_reference();
    return 0;
  }
  return run(config_path, suite, out, parallel, verbosity);
}
