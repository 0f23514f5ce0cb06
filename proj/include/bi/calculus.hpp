// The sequent calculus: rule schemas, instance enumeration, proof checking.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bi/syntax.hpp"

namespace bi {

enum class RuleId : std::uint8_t {
  AndL, AndR, StarL, StarR, OrL, OrR1, OrR2, ImpL, ImpR, WandL, WandR,
  MultTopL1, MultTopL2, TopL, TopR, BotL, BotAx, Id,
  Comm, Asso, AssoInv, E1, E2, C, W, Cut, Taut, WStarR
};

inline constexpr int kRuleCount = 28;

std::string rule_name(RuleId r);
RuleId parse_rule(const std::string& name);  // throws std::invalid_argument
std::vector<RuleId> all_rules();

// Rules that only rearrange a bunch within its coherent-equivalence class.
bool is_equivalence_rule(RuleId r);

struct RuleInstance {
  RuleId rule;
  BunchPath position;               // sub-bunch the rule acts on; root for right rules
  std::optional<Formula> formula;   // cut formula, or the formula introduced by BotL
  bool unit_formula = false;        // MultTopL2: insert the formula I instead of @m

  std::string str() const;
  friend bool operator==(const RuleInstance&, const RuleInstance&) = default;
};

struct RuleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SearchPolicy {
  int depth = 8;
  bool include_cut = false;
  bool loop_check = true;
  std::vector<RuleId> rule_order;  // empty: default order
  int contraction_copies = 2;      // max equal additive siblings contraction may create
  bool invertible_first = false;   // commit to the first applicable invertible rule; not height-preserving
  std::size_t node_cap = 1000000;
  int jobs = 1;                    // >1: extra threads precompute successors; results do not depend on it
};

// Premisses of r at s; empty means the single premiss □. Throws RuleError.
std::vector<Sequent> apply(const RuleInstance& r, const Sequent& s);

// Raw instances applicable to s exactly as it stands. Cut only with include_cut
// (cut formulas drawn from the subformulas of s); BotL never.
std::vector<RuleInstance> instances(const Sequent& s, const SearchPolicy& policy = {});

// Context rewrite of a single-premiss structural or unit rule.
Bunch apply_structural(const RuleInstance& r, const Bunch& b);

// Equivalence-rule steps rewriting b into normalize(b).
std::vector<RuleInstance> normalization_steps(const Bunch& b);
// Equivalence-rule steps rewriting `from` into `to`; requires equiv(from, to).
std::vector<RuleInstance> rearrangement_steps(const Bunch& from, const Bunch& to);

// A derivation tree. A node without a rule is a leaf: □, or an open premiss in a template.
struct Proof {
  Sequent sequent;
  std::optional<RuleInstance> rule;
  std::vector<Proof> children;

  std::size_t size() const;
  std::size_t height() const;
  std::vector<const Proof*> leaves() const;
};

struct CheckResult {
  bool ok = true;
  std::vector<int> where;  // child indices from the root to the first violation
  std::string message;
  explicit operator bool() const { return ok; }
};

CheckResult check_proof(const Proof& p, bool allow_open = false);

// Proof of g : compact(g).
Proof taut_proof(const Bunch& g);

// Expansion of a derived rule into primitive steps; open leaves are the derived rule's premisses.
// names: "taut-rule" (Γ ; φ : φ), "wstar" (Γ ; (Δ , Δ') : φ * ψ),
// "botfromcut" (Γ(F) : χ, with pos at F and formula φ).
Proof admissible_demo(const std::string& name, const Sequent& s, const BunchPath& pos = {},
                      const std::optional<Formula>& formula = std::nullopt);

// Builds a tree from a conclusion and successive steps; the last step's premisses are open.
Proof chain(const Sequent& s, const std::vector<RuleInstance>& steps);

}  // namespace bi
