// Proof objects as .biproof.json documents.
#pragma once

#include <json.hpp>

#include "bi/calculus.hpp"

namespace bi {

// {"sequent", "rule", "position" (L/R string), "params", "children"}; □ leaves carry only "sequent": "|-".
nlohmann::json proof_to_json(const Proof& p);
Proof proof_from_json(const nlohmann::json& j);  // throws std::runtime_error on malformed input

nlohmann::json instance_to_json(const RuleInstance& r);
RuleInstance instance_from_json(const nlohmann::json& j);

}  // namespace bi
