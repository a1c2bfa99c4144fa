#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "gn/dirac.hpp"
#include "gn/flow.hpp"

namespace gn {

// Thrown for malformed or invalid configuration; `field` is "section.key".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  LatticeGeometry geometry;  // geometry.L, M, N, sites_per_side, n_internal
  int lattice_sites = 2;     // geometry.lattice_sites: sites of the exact tiny lattice (a row)

  double g_f = 0.05;         // couplings.g_f
  double z_f = 0.0;          // couplings.z_f (renormalized propagator / two-point seed)
  std::string provider = "constant";  // couplings.provider
  FlowConstants flow;        // couplings.beta … couplings.g_max, geometry.L
  int flow_N = 100;          // couplings.flow_N

  std::string suite = "all";  // run.suite
  std::uint64_t seed = 20240601;  // run.seed
  int random_cases = 20;      // run.random_cases
  double tol_exact = 1e-12;    // run.tol_exact
  double tol_identity = 1e-10;  // run.tol_identity
  double tol_covariance = 1e-10;  // run.tol_covariance

  std::string out_dir = "gnlab-out";  // output.dir
  std::string report = "report.json";  // output.report

  void validate() const;
};

const std::vector<std::string>& suite_names();  // identities, covariance, polymer, flow, correlators

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& ini_text);

// Markdown reference of every key with its default.
std::string config_reference();

}  // namespace gn
