// Two-sorted meta-logic over worlds and BI formulas, its intuitionistic sequent
// calculus, and the definitional theory of the semantics.
//
// World terms are names; "e" and "pi" are constants, every other name is a
// variable. Formula terms are BI formulas in which atoms spelled "$x" are
// formula variables.
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "bi/syntax.hpp"

namespace bi {

enum class MK : std::uint8_t { Sat, Rel, Leq, Eq, And, Or, Imp, ForallW, ExistsW, ForallF, ExistsF, Verum, Falsum };

bool is_world_constant(const std::string& w);
bool is_formula_var(const std::string& name);  // "$x"

struct MNode;

class MetaFormula {
 public:
  static MetaFormula sat(std::string w, Formula f);
  static MetaFormula rel(std::string x, std::string y, std::string z);
  static MetaFormula leq(std::string x, std::string y);
  static MetaFormula eq(std::string x, std::string y);
  static MetaFormula conj(MetaFormula a, MetaFormula b);
  static MetaFormula disj(MetaFormula a, MetaFormula b);
  static MetaFormula imp(MetaFormula a, MetaFormula b);
  static MetaFormula forall_w(std::string v, MetaFormula body);
  static MetaFormula exists_w(std::string v, MetaFormula body);
  static MetaFormula forall_f(std::string v, MetaFormula body);
  static MetaFormula exists_f(std::string v, MetaFormula body);
  static MetaFormula verum();
  static MetaFormula falsum();

  MK kind() const;
  bool is(MK k) const { return kind() == k; }
  bool is_quantifier() const;
  const std::vector<std::string>& worlds() const;  // Sat: 1, Rel: 3, Leq/Eq: 2
  const Formula& formula() const;                  // Sat
  const std::string& var() const;                  // quantifiers
  const MetaFormula& left() const;                 // And/Or/Imp
  const MetaFormula& right() const;
  const MetaFormula& body() const;                 // quantifiers

  std::string str() const;
  friend bool operator==(const MetaFormula& a, const MetaFormula& b);
  friend bool operator<(const MetaFormula& a, const MetaFormula& b) { return a.str() < b.str(); }

 private:
  explicit MetaFormula(std::shared_ptr<const MNode> n) : n_(std::move(n)) {}
  std::shared_ptr<const MNode> n_;
};

struct MNode {
  MK kind;
  std::vector<std::string> worlds;
  std::optional<Formula> f;
  std::string var;
  std::optional<MetaFormula> a, b;
};

MetaFormula parse_meta(const std::string& text);  // throws ParseError

// Free world variables (constants excluded) and free formula variables.
std::set<std::string> free_worlds(const MetaFormula& f);
std::set<std::string> free_fvars(const MetaFormula& f);
// Capture-avoiding substitution of a world term, or of a formula term for "$x".
MetaFormula subst_world(const MetaFormula& f, const std::string& x, const std::string& t);
MetaFormula subst_formula(const MetaFormula& f, const std::string& x, const Formula& t);
// Instantiates the outermost quantifier with a term of its sort (world name or formula text).
MetaFormula instantiate(const MetaFormula& q, const std::string& term);

struct MetaSequent {
  std::vector<MetaFormula> ctx;
  std::vector<MetaFormula> ext;
  std::string str() const;
  std::set<std::string> free_worlds() const;
};
bool same_multiset(const MetaSequent& a, const MetaSequent& b);

// Named closed sentences, available at every node of a derivation and never consumed.
struct Theory {
  std::string name;
  std::vector<std::pair<std::string, MetaFormula>> sentences;
  const MetaFormula* find(const std::string& n) const;
};

// The five frame and persistence laws plus twelve satisfaction-clause directions.
const Theory& sigma_bi();
// sigma_bi together with reflexivity, the I clause (both directions), unit monotonicity and pi absorption.
const Theory& certification_theory();
const Theory* theory_by_name(const std::string& n);

// w |= compact(Γ) : w |= φ. Throws std::invalid_argument on □.
MetaSequent embed(const Sequent& s, const std::string& w = "w");

// ---------------------------------------------------------------- derivations

// Rules: wL wR eL eR andL andR orL orR impL impR allL allR exL exR id verumR hyp,
// and with `classical`: allK impK cL cR. "hyp" marks an open premiss of a fragment.
struct MetaDerivation {
  MetaSequent seq;
  std::string rule;      // empty while under construction
  int principal = -1;    // index into ctx (left rules) or ext (right rules)
  std::string axiom;     // allL on a theory sentence instead of ctx[principal]
  std::string term;      // allL, exR: instantiating term
  std::string eigen;     // allR, exL, allK: fresh variable
  std::vector<MetaDerivation> kids;

  std::size_t size() const;
  std::vector<const MetaDerivation*> hyps() const;
};

struct DljOptions {
  bool classical = false;
  bool allow_hyp = false;
  const Theory* theory = nullptr;  // defaults to sigma_bi()
};

struct DljCheck {
  bool ok = true;
  std::vector<int> where;
  std::string message;
  explicit operator bool() const { return ok; }
};

DljCheck check_dlj(const MetaDerivation& d, const DljOptions& opt = {});
bool world_conservative(const MetaDerivation& d);
bool world_independent(const MetaSequent& a, const MetaSequent& b);

// Replaces each hyp leaf whose sequent matches (as multisets) by the corresponding derivation.
void plug(MetaDerivation& d, const std::vector<MetaDerivation>& subs);

nlohmann::json derivation_to_json(const MetaDerivation& d);
MetaDerivation derivation_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------- tactics

// Fresh world names w0, w1, ... avoiding names already in use.
class NameSupply {
 public:
  void reserve(const std::string& n) { used_.insert(n); }
  void reserve(const MetaSequent& s);
  std::string fresh();

 private:
  std::set<std::string> used_;
  int next_ = 0;
};

// Top-down construction of a derivation. Goals are nodes whose rule is still empty;
// new formulas are appended to the end of ctx/ext.
class Builder {
 public:
  using G = MetaDerivation*;
  Builder(const Theory& th, NameSupply& names) : th_(th), names_(names) {}

  static int find(const std::vector<MetaFormula>& v, const MetaFormula& f);  // -1 when absent

  G wL(G g, int i);
  G wR(G g, int i);
  G andL(G g, int i);
  std::pair<G, G> andR(G g, int i);
  std::pair<G, G> orL(G g, int i);
  G orR(G g, int i);
  std::pair<G, G> impL(G g, int i);
  G impR(G g);
  G allL(G g, int i, const std::string& term);
  G allL_axiom(G g, const std::string& axiom, const std::string& term);
  G allR(G g, const std::string& eigen);
  G exL(G g, int i, const std::string& eigen);
  G exR(G g, int i, const std::string& term);
  void id(G g);
  void verum(G g);
  void hyp(G g);

  // Weakens down to exactly `ctx` : `ext` (multisets).
  G keep(G g, const std::vector<MetaFormula>& ctx, const std::vector<MetaFormula>& ext);
  void close(G g, const MetaFormula& f);  // f in ctx and ext
  // Instance of a theory sentence with the given terms, appended to ctx.
  G inst(G g, const std::string& axiom, const std::vector<std::string>& terms);
  // Uses ctx-instance index i = A => B: proves A by `left` and returns the goal with B in ctx.
  template <class F>
  G use(G g, int i, F&& left) {
    auto [l, r] = impL(g, i);
    left(l);
    return r;
  }
  // Resolution with a sentence that is a chain of ∀ over an implication A => B.
  // Left: A is ctx[i], replaced by B. Right: B is ext[i], replaced by A.
  G resolve_left(G g, const std::string& axiom, int i);
  G resolve_right(G g, const std::string& axiom, int i);
  // Adds the consequent of an instance A1 => ... => B to ctx, proving each Ai from ctx
  // members by id, &R, □R and ∃R with the given witnesses in order.
  G derive(G g, const std::string& axiom, const std::vector<std::string>& terms,
           const std::vector<std::string>& witnesses = {});

  NameSupply& names() { return names_; }
  const Theory& theory() const { return th_; }

 private:
  void prove_by_lookup(G g, const MetaFormula& goal, const std::vector<std::string>& witnesses, std::size_t& wi);
  G make(G g, std::string rule, MetaSequent prem);
  const Theory& th_;
  NameSupply& names_;
};

// Terms instantiating the prefix of `axiom` so that the antecedent (lhs=true) or the
// consequent of its implication matches `target`. Returns nullopt when no match.
std::optional<std::vector<std::string>> match_axiom(const Theory& th, const std::string& axiom,
                                                    const MetaFormula& target, bool lhs);

enum class Side { Left, Right };

struct Resolution {
  MetaSequent premiss;
  MetaDerivation fragment;  // conclusion ms, single hyp leaf = premiss
};

// Closed resolution of ms with the clause for `clause` ("top", "bot", "and", "or", "imp", "star", "wand")
// at ctx[index] (Left) or ext[index] (Right). Right resolution of "imp" and "wand" also
// introduces the universally bound worlds as fresh eigenvariables.
Resolution resolve(const MetaSequent& ms, const std::string& clause, Side side, int index, NameSupply& names);

struct Unpacked {
  MetaSequent out;
  MetaDerivation fragment;
};

// Eagerly splits every ∧ and * assertion in the context (fresh worlds for *).
Unpacked unpack(const MetaSequent& ms, NameSupply& names);
// Replaces the split assertions and relation atoms that rebuild w |= f by w |= f itself;
// pack(unpack(m)) = m as multisets.
Unpacked pack(const MetaSequent& ms, const std::string& w, const Formula& f, NameSupply& names);
Unpacked pack(const MetaSequent& ms, const std::string& w, const Bunch& shape, NameSupply& names);

}  // namespace bi
