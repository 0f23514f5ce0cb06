// Reductive search over coherent-equivalence classes of sequents.
//
// Search states are normalized sequents. One search step is a logical, unit,
// weakening, contraction or cut rule applied at some representative of the
// class; the equivalence rules themselves are invisible to depth. Proofs are
// re-encoded as raw derivations by inserting the equivalence steps explicitly.
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bi/calculus.hpp"

namespace bi {

// One raw step of a search step: rearrange to `target` (if given), then apply `inst`.
struct Phase {
  std::optional<Bunch> target;
  RuleInstance inst;
};

// A search step: phases whose last rule yields `premisses` (normalized).
struct Alternative {
  RuleId rule;
  std::vector<Phase> phases;
  std::vector<Sequent> premisses;
};

std::vector<RuleId> default_rule_order();
bool is_invertible(RuleId r);

// All search steps from s, in rule order, deduplicated by premiss set; premiss sets
// containing s itself are dropped. s is normalized first.
std::vector<Alternative> alternatives(const Sequent& s, const SearchPolicy& policy = {});
std::vector<std::vector<Sequent>> reduce(const Sequent& s, const SearchPolicy& policy = {});

// Raw derivation from `raw` (equivalent to the alternative's source); open leaves are the raw premisses.
Proof realize(const Sequent& raw, const Alternative& alt);

// ---------------------------------------------------------------- and/or space

struct SpaceEdge {
  Alternative alt;
  std::vector<int> children;  // node ids; a closing step has one □ child
};

struct SpaceNode {
  Sequent sequent;
  int depth = 0;
  bool looped = false;     // repeats an ancestor; not expanded
  bool truncated = false;  // at the depth bound; not expanded
  std::vector<SpaceEdge> edges;
};

struct SearchSpace {
  Sequent root_raw;
  std::vector<SpaceNode> nodes;  // nodes[0] is the root
  bool capped = false;
  std::string to_dot() const;
};

SearchSpace space(const Sequent& s, const SearchPolicy& policy = {});

struct Reduction {
  std::vector<std::pair<int, int>> choices;  // (node, edge index), in visiting order
  std::vector<int> leaves;
  bool successful = false;
};

// Enumerates reductions in a fixed order until `visit` returns false.
void extract_reductions(const SearchSpace& sp, const std::function<bool(const Reduction&)>& visit);
Proof reduction_to_proof(const SearchSpace& sp, const Reduction& r);

// ---------------------------------------------------------------- proving

struct MacroNode {
  Sequent sequent;  // normalized
  Alternative alt;
  std::vector<std::shared_ptr<const MacroNode>> kids;
  int height = 1;
};

enum class Unproven { None, DepthExhausted, ExhaustedSpace };

struct SearchBudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using SuccessorFn = std::function<std::vector<Alternative>(const Sequent&)>;

struct MacroResult {
  std::shared_ptr<const MacroNode> proof;
  Unproven reason = Unproven::None;
  int depth = 0;            // iteration that decided the result
  std::size_t expanded = 0;
};

// Iterative deepening over `succ` (defaults to `alternatives`). Throws SearchBudgetExceeded.
MacroResult search(const Sequent& s, const SearchPolicy& policy, const SuccessorFn& succ = {});

struct ProveResult {
  std::optional<Proof> proof;
  Unproven reason = Unproven::None;
  int depth = 0;
  std::size_t expanded = 0;
  std::shared_ptr<const MacroNode> macro;
  bool proved() const { return proof.has_value(); }
};

ProveResult prove(const Sequent& s, const SearchPolicy& policy = {});

// Raw derivation of `raw` following a search proof.
Proof materialize(const Sequent& raw, const MacroNode& m);

std::string reason_str(Unproven u);

}  // namespace bi
