#pragma once

#include <json.hpp>

#include "gn/grassmann.hpp"

namespace gn {

// Term list: [{"modes": [[species, site, spin, color], ...], "coef": [re, im]}, ...]
nlohmann::json element_to_json(const CElement& e);
CElement element_from_json(const UniversePtr& u, const nlohmann::json& j);

}  // namespace gn
