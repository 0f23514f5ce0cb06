// Validity search over basic validity sequents, and its bisimulation with sLBI.
//
// A state is a world, a bunch and an extract, standing for the meta-sequent
// w |= compact(Γ) : w |= φ with the theory left implicit. VBI steps reuse the
// search table of sLBI; each step is certified by a meta-derivation fragment
// over certification_theory() whose open premisses are the premiss states.
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bi/metalogic.hpp"
#include "bi/search.hpp"

namespace bi {

struct VState {
  std::string world = "w";
  Bunch context = Bunch::mult_unit();
  Formula extract = Formula::top();

  static VState of(const Sequent& s, const std::string& w = "w");
  Sequent sequent() const { return Sequent::make(context, extract); }
  MetaSequent bvs() const { return embed(sequent(), world); }
};

// Open premisses of a certified fragment, in preorder, with their worlds.
struct Certified {
  MetaDerivation derivation;
  std::vector<VState> hyps;
};

// Certifies a raw derivation of p.sequent at world w. Open leaves of p become hyp leaves.
// Throws std::logic_error on a rule without a certificate (Taut and WStarR are handled as Id and StarR).
Certified certify(const Proof& p, const std::string& w, NameSupply& names);

struct VAlternative {
  Alternative alt;
  std::vector<VState> premisses;           // worlds are those of the fragment's hyps
  std::optional<MetaDerivation> fragment;  // conclusion v.bvs(); hyps = premisses' bvs
};

// The search alternatives of v.sequent(), decorated with worlds and certified when asked.
std::vector<VAlternative> vbi_reduce(const VState& v, const SearchPolicy& policy = {}, bool certify_steps = true);

struct VNode {
  VState state;
  Alternative alt;
  std::vector<std::shared_ptr<const VNode>> kids;
};

struct VbiResult {
  std::shared_ptr<const VNode> proof;
  std::optional<MetaDerivation> derivation;  // closed, conclusion embed(s, "w")
  Unproven reason = Unproven::None;
  int depth = 0;
  std::size_t expanded = 0;
  bool proved() const { return proof != nullptr; }
};

// Iterative deepening over vbi_reduce; a proof's fragments are plugged into one derivation.
VbiResult vbi_prove(const Sequent& s, const SearchPolicy& policy = {});

// Same rules, positions and branching at every node.
bool isomorphic(const MacroNode& a, const VNode& b);

// DLJ check over certification_theory() plus world-conservativity.
DljCheck check_certificate(const MetaDerivation& d, bool allow_hyp = false);

// ---------------------------------------------------------------- bisimulation

struct BisimNode {
  Sequent state;
  int depth = 0;
  std::vector<std::string> matched;         // "Rule: premiss; premiss"
  std::vector<std::string> unmatched_slbi;  // premiss sets of reduce absent from vbi_reduce
  std::vector<std::string> unmatched_vbi;   // and conversely, or uncertified
  std::vector<std::string> spot;            // disagreements of the spot-check re-implementations
  bool ok() const { return unmatched_slbi.empty() && unmatched_vbi.empty() && spot.empty(); }
};

struct BisimResult {
  std::vector<BisimNode> nodes;
  bool capped = false;
  bool bisimilar() const;
  std::size_t matched() const;
  std::size_t unmatched() const;
  std::string report() const;
  nlohmann::json to_json() const;
};

struct BisimOptions {
  bool check_fragments = true;
  std::size_t node_cap = 20000;  // states visited; exceeding it sets `capped`
};

BisimResult bisim_check(const Sequent& s, int depth, const SearchPolicy& policy = {}, const BisimOptions& opt = {});

// The five spot-check rules computed without the shared table.
// Direct: straight from the rule schemas. Meta: by right resolution of the embedded sequent.
std::vector<std::vector<Sequent>> spot_direct(RuleId r, const Sequent& s);
std::vector<std::vector<Sequent>> spot_meta(RuleId r, const Sequent& s);
std::vector<RuleId> spot_rules();

}  // namespace bi
