#include "bi/proof_io.hpp"

namespace bi {

using nlohmann::json;

json instance_to_json(const RuleInstance& r) {
  json j;
  j["rule"] = rule_name(r.rule);
  j["position"] = path_str(r.position);
  json params = json::object();
  if (r.formula) params["formula"] = r.formula->str();
  if (r.unit_formula) params["unit"] = "I";
  j["params"] = params;
  return j;
}

namespace {

// Malformed documents surface as std::runtime_error whatever layer noticed them.
template <class F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed proof document: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(e.what());
  } catch (const std::out_of_range& e) {
    throw std::runtime_error(e.what());
  }
}

RuleInstance instance_rec(const json& j) {
  RuleInstance r{parse_rule(j.at("rule").get<std::string>()), {}, std::nullopt, false};
  if (j.contains("position")) r.position = parse_path(j.at("position").get<std::string>());
  if (j.contains("params")) {
    const json& p = j.at("params");
    if (p.contains("formula")) r.formula = parse_formula(p.at("formula").get<std::string>());
    if (p.contains("unit")) {
      const auto u = p.at("unit").get<std::string>();
      if (u != "I" && u != "@m") throw std::runtime_error("bad unit parameter '" + u + "'");
      r.unit_formula = u == "I";
    }
  }
  return r;
}

Proof proof_rec(const json& j) {
  if (!j.is_object() || !j.contains("sequent")) throw std::runtime_error("proof node without a sequent");
  Proof p{parse_sequent(j.at("sequent").get<std::string>()), std::nullopt, {}};
  if (j.contains("rule") && !j.at("rule").is_null()) p.rule = instance_rec(j);
  if (j.contains("children"))
    for (const auto& c : j.at("children")) p.children.push_back(proof_rec(c));
  return p;
}

}  // namespace

RuleInstance instance_from_json(const json& j) {
  return guarded([&] { return instance_rec(j); });
}

json proof_to_json(const Proof& p) {
  json j;
  j["sequent"] = p.sequent.str();
  if (p.rule) {
    json ri = instance_to_json(*p.rule);
    j["rule"] = ri["rule"];
    j["position"] = ri["position"];
    j["params"] = ri["params"];
  }
  if (!p.children.empty()) {
    json cs = json::array();
    for (const auto& c : p.children) cs.push_back(proof_to_json(c));
    j["children"] = std::move(cs);
  }
  return j;
}

Proof proof_from_json(const json& j) {
  return guarded([&] { return proof_rec(j); });
}

}  // namespace bi
