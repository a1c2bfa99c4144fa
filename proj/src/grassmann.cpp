#include "gn/grassmann.hpp"
#include "gn/serialize.hpp"

namespace gn {

std::string species_name(Species s) {
  switch (s) {
    case Species::Psi: return "psi";
    case Species::PsiBar: return "psibar";
    case Species::J: return "J";
    case Species::JBar: return "Jbar";
  }
  return "?";
}

Universe::Universe(std::vector<Mode> modes) : modes_(std::move(modes)) {
  std::sort(modes_.begin(), modes_.end());
  if (std::adjacent_find(modes_.begin(), modes_.end()) != modes_.end())
    throw std::invalid_argument("universe: duplicate mode");
  if (modes_.size() > 64) throw std::invalid_argument("universe: more than 64 generators");
}

std::shared_ptr<const Universe> Universe::lattice(int n_sites, int n_internal,
                                                  const std::vector<Species>& species) {
  std::vector<Mode> m;
  for (Species s : species)
    for (int x = 0; x < n_sites; ++x)
      for (int a = 0; a < 2; ++a)
        for (int i = 0; i < n_internal; ++i) m.push_back({s, x, a, i});
  return std::make_shared<const Universe>(std::move(m));
}

std::optional<int> Universe::find(const Mode& m) const {
  auto it = std::lower_bound(modes_.begin(), modes_.end(), m);
  if (it == modes_.end() || !(*it == m)) return std::nullopt;
  return static_cast<int>(it - modes_.begin());
}

int Universe::index(const Mode& m) const {
  auto g = find(m);
  if (!g)
    throw std::out_of_range("mode not in universe: " + species_name(m.species) + " site " +
                            std::to_string(m.site));
  return *g;
}

std::uint64_t Universe::species_mask(Species s) const {
  std::uint64_t mask = 0;
  for (std::size_t g = 0; g < modes_.size(); ++g)
    if (modes_[g].species == s) mask |= 1ULL << g;
  return mask;
}

std::vector<int> Universe::generators(Species s) const {
  std::vector<int> out;
  for (std::size_t g = 0; g < modes_.size(); ++g)
    if (modes_[g].species == s) out.push_back(static_cast<int>(g));
  return out;
}

nlohmann::json element_to_json(const CElement& e) {
  nlohmann::json terms = nlohmann::json::array();
  const auto& u = *e.universe();
  for (auto& [k, c] : e.terms()) {
    nlohmann::json modes = nlohmann::json::array();
    for (std::uint64_t r = k; r; r &= r - 1) {
      const Mode& m = u.mode(std::countr_zero(r));
      modes.push_back({static_cast<int>(m.species), m.site, m.spin, m.color});
    }
    terms.push_back({{"modes", modes}, {"coef", {c.real(), c.imag()}}});
  }
  return terms;
}

CElement element_from_json(const UniversePtr& u, const nlohmann::json& j) {
  CElement out(u);
  const double tol = out.prune_tolerance();
  out.set_prune_tolerance(0.0);
  for (auto& t : j) {
    std::vector<Mode> modes;
    for (auto& m : t.at("modes"))
      modes.push_back({static_cast<Species>(m.at(0).get<int>()), m.at(1).get<int>(),
                       m.at(2).get<int>(), m.at(3).get<int>()});
    const auto& c = t.at("coef");
    out += make_monomial<cplx>(u, modes, cplx(c.at(0).get<double>(), c.at(1).get<double>()));
  }
  return out.set_prune_tolerance(tol);
}

}  // namespace gn
