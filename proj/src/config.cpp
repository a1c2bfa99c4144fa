#include "gn/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace gn {

namespace {

template <class T>
T parse_value(const std::string& field, const std::string& text) {
  std::istringstream ss(text);
  T v{};
  ss >> v;
  if (ss.fail() || !(ss >> std::ws).eof()) throw ConfigError(field, "cannot parse '" + text + "'");
  return v;
}

template <class T>
std::string show(const T& v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

struct Key {
  std::string section, name, help;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <class T>
Key make_key(std::string section, std::string name, std::string help, T ExperimentConfig::*member) {
  const std::string field = section + "." + name;
  return {section, name, std::move(help),
          [member, field](ExperimentConfig& c, const std::string& s) { c.*member = parse_value<T>(field, s); },
          [member](const ExperimentConfig& c) { return show(c.*member); }};
}

template <class Sub, class T>
Key make_nested(std::string section, std::string name, std::string help, Sub ExperimentConfig::*outer,
                T Sub::*member) {
  const std::string field = section + "." + name;
  return {section, name, std::move(help),
          [outer, member, field](ExperimentConfig& c, const std::string& s) {
            (c.*outer).*member = parse_value<T>(field, s);
          },
          [outer, member](const ExperimentConfig& c) { return show((c.*outer).*member); }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> k = [] {
    using E = ExperimentConfig;
    std::vector<Key> v;
    v.push_back(make_nested("geometry", "L", "block ratio", &E::geometry, &LatticeGeometry::L));
    v.push_back(make_nested("geometry", "M", "volume exponent (torus side L^M)", &E::geometry, &LatticeGeometry::M));
    v.push_back(make_nested("geometry", "N", "ultraviolet exponent", &E::geometry, &LatticeGeometry::N));
    v.push_back(make_nested("geometry", "sites_per_side", "position sampling resolution", &E::geometry,
                            &LatticeGeometry::sites_per_side));
    v.push_back(make_nested("geometry", "n_internal", "internal components", &E::geometry,
                            &LatticeGeometry::n_internal));
    v.push_back(make_key("geometry", "lattice_sites", "sites of the exact tiny lattice (one row)", &E::lattice_sites));
    v.push_back(make_key("couplings", "g_f", "final quartic coupling", &E::g_f));
    v.push_back(make_key("couplings", "z_f", "final field-strength coupling", &E::z_f));
    v.push_back(make_key("couplings", "provider", "constant | cubic-remainder", &E::provider));
    v.push_back(make_key("couplings", "flow_N", "number of flow stages", &E::flow_N));
    v.push_back(make_nested("couplings", "beta", "β_k", &E::flow, &FlowConstants::beta));
    v.push_back(make_nested("couplings", "beta_prime", "β′_k", &E::flow, &FlowConstants::beta_prime));
    v.push_back(make_nested("couplings", "theta", "θ_k", &E::flow, &FlowConstants::theta));
    v.push_back(make_nested("couplings", "theta_p", "θ^p_k", &E::flow, &FlowConstants::theta_p));
    v.push_back(make_nested("couplings", "theta_v", "θ^v_k", &E::flow, &FlowConstants::theta_v));
    v.push_back(make_nested("couplings", "contraction", "contraction of the remainder norm", &E::flow,
                            &FlowConstants::contraction));
    v.push_back(make_nested("couplings", "e_source", "cubic source of the remainder norm", &E::flow,
                            &FlowConstants::e_source));
    v.push_back(make_nested("couplings", "remainder_c", "c in starred = ±c g³", &E::flow,
                            &FlowConstants::remainder_c));
    v.push_back(make_nested("couplings", "C_Z", "bound |z| ≤ C_Z g", &E::flow, &FlowConstants::C_Z));
    v.push_back(make_nested("couplings", "C_E", "bounds on e_norm, |p|, |v|", &E::flow, &FlowConstants::C_E));
    v.push_back(make_nested("couplings", "g_max", "upper bound on g", &E::flow, &FlowConstants::g_max));
    v.push_back(make_key("run", "suite", "identities | covariance | polymer | flow | correlators | all", &E::suite));
    v.push_back(make_key("run", "seed", "random seed", &E::seed));
    v.push_back(make_key("run", "random_cases", "random instances per identity", &E::random_cases));
    v.push_back(make_key("run", "tol_exact", "tolerance for exact algebraic identities", &E::tol_exact));
    v.push_back(make_key("run", "tol_identity", "tolerance for composite identities", &E::tol_identity));
    v.push_back(make_key("run", "tol_covariance", "tolerance for covariance identities", &E::tol_covariance));
    v.push_back(make_key("output", "dir", "output directory", &E::out_dir));
    v.push_back(make_key("output", "report", "report file name inside the output directory", &E::report));
    return v;
  }();
  return k;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> s{"identities", "covariance", "polymer", "flow", "correlators"};
  return s;
}

void ExperimentConfig::validate() const {
  auto need = [](bool ok, const char* field, const char* what) {
    if (!ok) throw ConfigError(field, what);
  };
  need(geometry.L >= 2, "geometry.L", "must be >= 2");
  need(geometry.M >= 0 && geometry.M <= 8, "geometry.M", "must lie in 0..8");
  need(geometry.N >= 0 && geometry.N <= 8, "geometry.N", "must lie in 0..8");
  need(geometry.sites_per_side >= 2 && geometry.sites_per_side <= 64, "geometry.sites_per_side",
       "must lie in 2..64");
  need(geometry.n_internal >= 1 && geometry.n_internal <= 4, "geometry.n_internal", "must lie in 1..4");
  need(lattice_sites >= 1 && lattice_sites <= geometry.sites_per_side, "geometry.lattice_sites",
       "must lie in 1..sites_per_side");
  need(lattice_sites * 4 * geometry.n_internal <= 32, "geometry.lattice_sites",
       "too many modes for exact evaluation (at most 8 conjugate pairs)");
  need(std::isfinite(g_f) && g_f >= 0, "couplings.g_f", "must be >= 0");
  need(std::isfinite(z_f), "couplings.z_f", "must be finite");
  need(provider == "constant" || provider == "cubic-remainder", "couplings.provider",
       "must be constant or cubic-remainder");
  need(flow_N >= 0 && flow_N <= 100000, "couplings.flow_N", "must lie in 0..100000");
  need(flow.beta > 0, "couplings.beta", "must be > 0");
  need(flow.contraction >= 0 && flow.contraction < 1, "couplings.contraction", "must lie in [0, 1)");
  need(flow.e_source >= 0, "couplings.e_source", "must be >= 0");
  need(flow.remainder_c >= 0, "couplings.remainder_c", "must be >= 0");
  need(flow.C_Z > 0, "couplings.C_Z", "must be > 0");
  need(flow.C_E > 0, "couplings.C_E", "must be > 0");
  need(flow.g_max > 0, "couplings.g_max", "must be > 0");
  need(g_f < 0.5 * flow.g_max, "couplings.g_f", "must be below g_max/2");
  need(suite == "all" || std::find(suite_names().begin(), suite_names().end(), suite) != suite_names().end(),
       "run.suite", "unknown suite");
  need(random_cases >= 1 && random_cases <= 1000, "run.random_cases", "must lie in 1..1000");
  need(tol_exact > 0, "run.tol_exact", "must be > 0");
  need(tol_identity > 0, "run.tol_identity", "must be > 0");
  need(tol_covariance > 0, "run.tol_covariance", "must be > 0");
  need(!out_dir.empty(), "output.dir", "must not be empty");
  need(!report.empty(), "output.report", "must not be empty");
}

ExperimentConfig parse_config(const std::string& ini_text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(ini_text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config", std::string("malformed file: ") + e.message() + " at line " +
                                    std::to_string(e.line()));
  }
  ExperimentConfig c;
  c.flow.L = c.geometry.L;
  for (auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError(section, "key outside of a section");
    for (auto& [name, value] : body) {
      const auto& ks = keys();
      auto it = std::find_if(ks.begin(), ks.end(),
                             [&](const Key& k) { return k.section == section && k.name == name; });
      if (it == ks.end()) throw ConfigError(section + "." + name, "unknown key");
      it->set(c, value.get_value<std::string>());
    }
  }
  c.flow.L = c.geometry.L;
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_reference() {
  ExperimentConfig d;
  std::ostringstream out;
  std::string section;
  for (auto& k : keys()) {
    if (k.section != section) {
      section = k.section;
      out << "\n[" << section << "]\n\n| key | default | meaning |\n|---|---|---|\n";
    }
    out << "| " << k.name << " | " << k.get(d) << " | " << k.help << " |\n";
  }
  return out.str();
}

}  // namespace gn
