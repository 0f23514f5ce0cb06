#include "bi/calculus.hpp"

#include <algorithm>
#include <array>
#include <functional>

namespace bi {

namespace {

constexpr std::array<const char*, kRuleCount> kNames = {
    "AndL", "AndR", "StarL", "StarR", "OrL", "OrR1", "OrR2", "ImpL", "ImpR", "WandL", "WandR",
    "MultTopL1", "MultTopL2", "TopL", "TopR", "BotL", "BotAx", "Id",
    "Comm", "Asso", "AssoInv", "E1", "E2", "C", "W", "Cut", "Taut", "WStarR"};

[[noreturn]] void not_applicable(const RuleInstance& r, const std::string& why) {
  throw RuleError("rule-not-applicable: " + r.str() + ": " + why);
}

bool contains_implication(const Bunch& b) {
  if (b.is(BKind::Leaf)) return b.formula().is(FKind::Imp) || b.formula().is(FKind::Wand);
  if (b.is_former()) return contains_implication(b.left()) || contains_implication(b.right());
  return false;
}

bool is_mult_unit_like(const Bunch& b) {
  return b.is(BKind::MultUnit) || (b.is(BKind::Leaf) && b.formula().is(FKind::MultTop));
}

}  // namespace

std::string rule_name(RuleId r) { return kNames[static_cast<int>(r)]; }

RuleId parse_rule(const std::string& name) {
  for (int i = 0; i < kRuleCount; ++i)
    if (name == kNames[i]) return static_cast<RuleId>(i);
  throw std::invalid_argument("unknown rule '" + name + "'");
}

std::vector<RuleId> all_rules() {
  std::vector<RuleId> v;
  for (int i = 0; i < kRuleCount; ++i) v.push_back(static_cast<RuleId>(i));
  return v;
}

bool is_equivalence_rule(RuleId r) {
  switch (r) {
    case RuleId::Comm: case RuleId::Asso: case RuleId::AssoInv: case RuleId::E1: case RuleId::E2:
      return true;
    default:
      return false;
  }
}

std::string RuleInstance::str() const {
  std::string s = rule_name(rule) + "@" + (position.empty() ? std::string("e") : path_str(position));
  if (formula) s += "[" + formula->str() + "]";
  if (unit_formula) s += "[I]";
  return s;
}

// ---------------------------------------------------------------- schemas

Bunch apply_structural(const RuleInstance& r, const Bunch& g) {
  if (!g.has_path(r.position)) not_applicable(r, "invalid position");
  const Bunch& x = g.at(r.position);
  auto put = [&](Bunch nb) { return replace(g, r.position, nb); };
  switch (r.rule) {
    case RuleId::AndL:
      if (!x.is(BKind::Leaf) || !x.formula().is(FKind::And)) not_applicable(r, "no conjunction");
      return put(Bunch::semi(Bunch::leaf(x.formula().left()), Bunch::leaf(x.formula().right())));
    case RuleId::StarL:
      if (!x.is(BKind::Leaf) || !x.formula().is(FKind::Star)) not_applicable(r, "no star");
      return put(Bunch::comma(Bunch::leaf(x.formula().left()), Bunch::leaf(x.formula().right())));
    case RuleId::MultTopL1:
      if (!x.is(BKind::Comma) || !is_mult_unit_like(x.right())) not_applicable(r, "no multiplicative unit");
      return put(x.left());
    case RuleId::MultTopL2:
      return put(Bunch::comma(x, r.unit_formula ? Bunch::leaf(Formula::mtop()) : Bunch::mult_unit()));
    case RuleId::TopL:
      return put(Bunch::semi(x, Bunch::add_unit()));
    case RuleId::BotL:
      if (!x.is(BKind::Leaf) || !x.formula().is(FKind::Bottom)) not_applicable(r, "no F");
      if (!r.formula) not_applicable(r, "missing formula");
      return put(Bunch::leaf(*r.formula));
    case RuleId::Comm:
      if (!x.is(BKind::Comma)) not_applicable(r, "not a ','");
      return put(Bunch::comma(x.right(), x.left()));
    case RuleId::Asso:
      if (!x.is(BKind::Comma) || !x.right().is(BKind::Comma)) not_applicable(r, "shape");
      return put(Bunch::comma(Bunch::comma(x.left(), x.right().left()), x.right().right()));
    case RuleId::AssoInv:
      if (!x.is(BKind::Comma) || !x.left().is(BKind::Comma)) not_applicable(r, "shape");
      return put(Bunch::comma(x.left().left(), Bunch::comma(x.left().right(), x.right())));
    case RuleId::E1:
      if (!x.is(BKind::Semi)) not_applicable(r, "not a ';'");
      return put(Bunch::semi(x.right(), x.left()));
    case RuleId::E2:
      if (!x.is(BKind::Semi) || !x.right().is(BKind::Semi)) not_applicable(r, "shape");
      return put(Bunch::semi(Bunch::semi(x.left(), x.right().left()), x.right().right()));
    case RuleId::C:
      if (!contains_implication(x)) not_applicable(r, "contracted bunch holds no implication");
      return put(Bunch::semi(x, x));
    case RuleId::W:
      if (!x.is(BKind::Semi)) not_applicable(r, "not a ';'");
      return put(x.left());
    default:
      not_applicable(r, "not a structural rule");
  }
}

std::vector<Sequent> apply(const RuleInstance& r, const Sequent& s) {
  if (s.is_box()) not_applicable(r, "empty sequent");
  if (r.formula && r.rule != RuleId::Cut && r.rule != RuleId::BotL) not_applicable(r, "unexpected formula parameter");
  if (r.unit_formula && r.rule != RuleId::MultTopL2) not_applicable(r, "unexpected unit parameter");
  const Bunch& g = s.ctx();
  const Formula& chi = s.goal();
  if (!g.has_path(r.position)) not_applicable(r, "invalid position");
  auto at_root = [&] {
    if (!r.position.empty()) not_applicable(r, "right rules act at the root");
  };
  auto goal_is = [&](FKind k) {
    at_root();
    if (!chi.is(k)) not_applicable(r, "extract has the wrong connective");
  };
  const Bunch& x = g.at(r.position);
  switch (r.rule) {
    case RuleId::AndR:
      goal_is(FKind::And);
      return {Sequent::make(g, chi.left()), Sequent::make(g, chi.right())};
    case RuleId::OrR1:
      goal_is(FKind::Or);
      return {Sequent::make(g, chi.left())};
    case RuleId::OrR2:
      goal_is(FKind::Or);
      return {Sequent::make(g, chi.right())};
    case RuleId::ImpR:
      goal_is(FKind::Imp);
      return {Sequent::make(Bunch::semi(g, Bunch::leaf(chi.left())), chi.right())};
    case RuleId::WandR:
      goal_is(FKind::Wand);
      return {Sequent::make(Bunch::comma(g, Bunch::leaf(chi.left())), chi.right())};
    case RuleId::StarR:
    case RuleId::WStarR:
      goal_is(FKind::Star);
      if (!g.is(BKind::Semi) || !g.right().is(BKind::Comma)) not_applicable(r, "context is not G ; (D1 , D2)");
      return {Sequent::make(g.right().left(), chi.left()), Sequent::make(g.right().right(), chi.right())};
    case RuleId::TopR:
      goal_is(FKind::Top);
      return {};
    case RuleId::Id:
    case RuleId::Taut:
      at_root();
      if (!g.is(BKind::Semi) || !g.right().is(BKind::Leaf) || g.right().formula() != chi)
        not_applicable(r, "context is not G ; extract");
      return {};
    case RuleId::BotAx:
      if (!x.is(BKind::Leaf) || !x.formula().is(FKind::Bottom)) not_applicable(r, "no F");
      return {};
    case RuleId::OrL: {
      if (!x.is(BKind::Leaf) || !x.formula().is(FKind::Or)) not_applicable(r, "no disjunction");
      return {Sequent::make(replace(g, r.position, Bunch::leaf(x.formula().left())), chi),
              Sequent::make(replace(g, r.position, Bunch::leaf(x.formula().right())), chi)};
    }
    case RuleId::ImpL: {
      if (!x.is(BKind::Semi) || !x.right().is(BKind::Leaf) || !x.right().formula().is(FKind::Imp))
        not_applicable(r, "sub-bunch is not D ; (a -> b)");
      const Formula& f = x.right().formula();
      return {Sequent::make(x.left(), f.left()),
              Sequent::make(replace(g, r.position, Bunch::semi(x.left(), Bunch::leaf(f.right()))), chi)};
    }
    case RuleId::WandL: {
      if (!x.is(BKind::Comma) || !x.right().is(BKind::Comma) || !x.right().right().is(BKind::Leaf) ||
          !x.right().right().formula().is(FKind::Wand))
        not_applicable(r, "sub-bunch is not D1 , (D2 , (a -* b))");
      const Formula& f = x.right().right().formula();
      return {Sequent::make(x.right().left(), f.left()),
              Sequent::make(replace(g, r.position, Bunch::comma(x.left(), Bunch::leaf(f.right()))), chi)};
    }
    case RuleId::Cut:
      if (!r.formula) not_applicable(r, "missing cut formula");
      return {Sequent::make(x, *r.formula), Sequent::make(replace(g, r.position, Bunch::leaf(*r.formula)), chi)};
    default:
      return {Sequent::make(apply_structural(r, g), chi)};
  }
}

std::vector<RuleInstance> instances(const Sequent& s, const SearchPolicy& policy) {
  std::vector<RuleInstance> out;
  if (s.is_box()) return out;
  const auto positions = subbunch_positions(s.ctx());
  std::vector<Formula> cuts;
  if (policy.include_cut) cuts = subformulas(s);
  auto try_add = [&](RuleInstance r) {
    try {
      apply(r, s);
      out.push_back(std::move(r));
    } catch (const RuleError&) {
    }
  };
  for (RuleId rule : all_rules()) {
    if (rule == RuleId::BotL) continue;
    if (rule == RuleId::Cut && !policy.include_cut) continue;
    for (const BunchPath& p : positions) {
      if (rule == RuleId::Cut) {
        for (const Formula& f : cuts) try_add({rule, p, f, false});
      } else if (rule == RuleId::MultTopL2) {
        try_add({rule, p, std::nullopt, false});
        try_add({rule, p, std::nullopt, true});
      } else {
        try_add({rule, p, std::nullopt, false});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------- canonical rearrangement

namespace {

class Canon {
 public:
  explicit Canon(Bunch b) : cur_(std::move(b)) {}

  void run() {
    BunchPath root;
    canon_at(root);
  }
  const Bunch& result() const { return cur_; }
  std::vector<RuleInstance> steps;

 private:
  void step(RuleId r, const BunchPath& p) {
    RuleInstance ri{r, p, std::nullopt, false};
    cur_ = apply_structural(ri, cur_);
    steps.push_back(std::move(ri));
  }

  static BunchPath ext(BunchPath p, Step s, std::size_t times = 1) {
    for (std::size_t i = 0; i < times; ++i) p.push_back(s);
    return p;
  }

  void canon_at(const BunchPath& p) {
    const Bunch x = cur_.at(p);
    if (!x.is_former()) return;
    const BKind f = x.kind();
    canon_at(ext(p, Step::L));
    canon_at(ext(p, Step::R));
    flatten_at(p, f);
    remove_units(p, f);
    sort_list(p, f);
  }

  void flatten_at(const BunchPath& p, BKind f) {
    if (cur_.at(p).kind() != f) return;
    flatten_at(ext(p, Step::L), f);
    while (cur_.at(p).right().kind() == f) {
      step(f == BKind::Semi ? RuleId::E2 : RuleId::Asso, p);
      flatten_at(ext(p, Step::L), f);
    }
  }

  std::vector<Bunch> elems(const BunchPath& p, BKind f) const {
    const Bunch& x = cur_.at(p);
    if (x.kind() != f) return {x};
    // Flat list: the left spine holds the elements.
    std::vector<Bunch> out;
    const Bunch* c = &x;
    while (c->kind() == f) {
      out.push_back(c->right());
      c = &c->left();
    }
    out.push_back(*c);
    std::reverse(out.begin(), out.end());
    return out;
  }

  // Swap elements j and j+1 of the flat list of n elements at p.
  void swap_adjacent(const BunchPath& p, BKind f, std::size_t n, std::size_t j) {
    const bool semi = f == BKind::Semi;
    const RuleId ex = semi ? RuleId::E1 : RuleId::Comm;
    const BunchPath node = ext(p, Step::L, n - 2 - j);
    if (j == 0) {
      step(ex, node);
      return;
    }
    step(ex, node);
    step(semi ? RuleId::E2 : RuleId::Asso, node);
    step(ex, ext(node, Step::L));
  }

  void remove_units(const BunchPath& p, BKind f) {
    const BKind unit = f == BKind::Semi ? BKind::AddUnit : BKind::MultUnit;
    for (;;) {
      auto es = elems(p, f);
      const std::size_t n = es.size();
      if (n < 2) return;
      std::size_t i = n;
      for (std::size_t k = n; k-- > 0;)
        if (es[k].kind() == unit) { i = k; break; }
      if (i == n) return;
      for (std::size_t j = i; j + 1 < n; ++j) swap_adjacent(p, f, n, j);
      step(f == BKind::Semi ? RuleId::W : RuleId::MultTopL1, p);
    }
  }

  void sort_list(const BunchPath& p, BKind f) {
    auto es = elems(p, f);
    const std::size_t n = es.size();
    for (std::size_t pass = 0; pass < n; ++pass) {
      bool moved = false;
      for (std::size_t j = 0; j + 1 < n; ++j) {
        if (es[j + 1] < es[j]) {
          swap_adjacent(p, f, n, j);
          std::swap(es[j], es[j + 1]);
          moved = true;
        }
      }
      if (!moved) break;
    }
  }

  Bunch cur_;
};

std::vector<RuleInstance> inverse(const RuleInstance& r) {
  const BunchPath& p = r.position;
  auto at = [](RuleId id, BunchPath q) { return RuleInstance{id, std::move(q), std::nullopt, false}; };
  BunchPath pr = p;
  pr.push_back(Step::R);
  switch (r.rule) {
    case RuleId::Comm: case RuleId::E1: return {r};
    case RuleId::Asso: return {at(RuleId::AssoInv, p)};
    case RuleId::AssoInv: return {at(RuleId::Asso, p)};
    case RuleId::E2: return {at(RuleId::E1, p), at(RuleId::E1, pr), at(RuleId::E2, p), at(RuleId::E1, p), at(RuleId::E1, pr)};
    case RuleId::W: return {at(RuleId::TopL, p)};
    case RuleId::TopL: return {at(RuleId::W, p)};
    case RuleId::MultTopL1: return {at(RuleId::MultTopL2, p)};
    case RuleId::MultTopL2: return {at(RuleId::MultTopL1, p)};
    default: throw std::logic_error("inverse: not an equivalence step");
  }
}

}  // namespace

std::vector<RuleInstance> normalization_steps(const Bunch& b) {
  Canon c(b);
  c.run();
  return std::move(c.steps);
}

std::vector<RuleInstance> rearrangement_steps(const Bunch& from, const Bunch& to) {
  if (from == to) return {};
  Canon a(from), b(to);
  a.run();
  b.run();
  if (!(a.result() == b.result())) throw std::invalid_argument("rearrangement_steps: bunches are not equivalent");
  std::vector<RuleInstance> out = std::move(a.steps);
  for (auto it = b.steps.rbegin(); it != b.steps.rend(); ++it) {
    auto inv = inverse(*it);
    out.insert(out.end(), inv.begin(), inv.end());
  }
  return out;
}

// ---------------------------------------------------------------- proofs

std::size_t Proof::size() const {
  std::size_t n = 1;
  for (const auto& c : children) n += c.size();
  return n;
}

std::size_t Proof::height() const {
  std::size_t h = 0;
  for (const auto& c : children) h = std::max(h, c.height());
  return rule ? h + 1 : 0;
}

std::vector<const Proof*> Proof::leaves() const {
  std::vector<const Proof*> out;
  std::function<void(const Proof&)> go = [&](const Proof& p) {
    if (!p.rule) out.push_back(&p);
    for (const auto& c : p.children) go(c);
  };
  go(*this);
  return out;
}

namespace {
CheckResult check_rec(const Proof& p, bool allow_open, std::vector<int>& where) {
  auto bad = [&](std::string msg) {
    CheckResult r;
    r.ok = false;
    r.where = where;
    r.message = std::move(msg);
    return r;
  };
  if (!p.rule) {
    if (!p.children.empty()) return bad("leaf without rule has children");
    if (p.sequent.is_box() || allow_open) return {};
    return bad("open premiss " + p.sequent.str());
  }
  if (p.sequent.is_box()) return bad("rule applied to the empty sequent");
  std::vector<Sequent> prem;
  try {
    prem = apply(*p.rule, p.sequent);
  } catch (const RuleError& e) {
    return bad(e.what());
  }
  if (prem.empty()) {
    if (p.children.size() != 1 || !p.children[0].sequent.is_box() || p.children[0].rule)
      return bad(p.rule->str() + " must close with a single empty premiss");
    return {};
  }
  if (p.children.size() != prem.size()) return bad(p.rule->str() + ": wrong number of premisses");
  for (std::size_t i = 0; i < prem.size(); ++i) {
    if (!(p.children[i].sequent == prem[i]))
      return bad(p.rule->str() + ": premiss " + std::to_string(i) + " should be " + prem[i].str() + " but is " +
                 p.children[i].sequent.str());
  }
  for (std::size_t i = 0; i < prem.size(); ++i) {
    where.push_back(static_cast<int>(i));
    auto r = check_rec(p.children[i], allow_open, where);
    if (!r) return r;
    where.pop_back();
  }
  return {};
}
}  // namespace

CheckResult check_proof(const Proof& p, bool allow_open) {
  std::vector<int> where;
  return check_rec(p, allow_open, where);
}

Proof chain(const Sequent& s, const std::vector<RuleInstance>& steps) {
  Proof root{s, std::nullopt, {}};
  Proof* cur = &root;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    auto prem = apply(steps[i], cur->sequent);
    cur->rule = steps[i];
    if (prem.empty()) {
      if (i + 1 != steps.size()) throw RuleError("chain: closing rule before the last step");
      cur->children.push_back(Proof{Sequent::box(), std::nullopt, {}});
      return root;
    }
    for (auto& q : prem) cur->children.push_back(Proof{std::move(q), std::nullopt, {}});
    if (i + 1 != steps.size()) {
      if (cur->children.size() != 1) throw RuleError("chain: branching rule before the last step");
      cur = &cur->children[0];
    }
  }
  return root;
}

namespace {
RuleInstance at_root(RuleId r) { return {r, {}, std::nullopt, false}; }

// Replaces the first open leaf of `top` (preorder) by `sub`.
bool graft_rec(Proof& top, Proof& sub) {
  if (!top.rule) {
    if (top.sequent.is_box()) return false;
    top = std::move(sub);
    return true;
  }
  for (auto& c : top.children)
    if (graft_rec(c, sub)) return true;
  return false;
}

void graft(Proof& top, Proof sub) {
  if (!graft_rec(top, sub)) throw std::logic_error("graft: no open leaf");
}
}  // namespace

Proof taut_proof(const Bunch& g) {
  const Sequent s = Sequent::make(g, compact(g));
  switch (g.kind()) {
    case BKind::AddUnit:
      return chain(s, {at_root(RuleId::TopR)});
    case BKind::Leaf:
      return chain(s, {at_root(RuleId::TopL), at_root(RuleId::E1), at_root(RuleId::Id)});
    case BKind::MultUnit: {
      RuleInstance add{RuleId::MultTopL2, {}, std::nullopt, true};
      Proof p = chain(s, {add, at_root(RuleId::Comm), at_root(RuleId::MultTopL1)});
      graft(p, taut_proof(Bunch::leaf(Formula::mtop())));
      return p;
    }
    case BKind::Semi: {
      Proof p{s, at_root(RuleId::AndR), {}};
      Proof l = chain(Sequent::make(g, compact(g.left())), {at_root(RuleId::W)});
      graft(l, taut_proof(g.left()));
      Proof r = chain(Sequent::make(g, compact(g.right())), {at_root(RuleId::E1), at_root(RuleId::W)});
      graft(r, taut_proof(g.right()));
      p.children.push_back(std::move(l));
      p.children.push_back(std::move(r));
      return p;
    }
    case BKind::Comma: {
      Proof p = chain(s, {at_root(RuleId::TopL), at_root(RuleId::E1), at_root(RuleId::StarR)});
      Proof* star = &p.children[0].children[0];
      star->children[0] = taut_proof(g.left());
      star->children[1] = taut_proof(g.right());
      return p;
    }
  }
  throw std::logic_error("taut_proof: bad bunch");
}

Proof admissible_demo(const std::string& name, const Sequent& s, const BunchPath& pos,
                      const std::optional<Formula>& formula) {
  if (name == "taut-rule") {
    apply(at_root(RuleId::Taut), s);
    Proof p = chain(s, {at_root(RuleId::E1), at_root(RuleId::W)});
    graft(p, taut_proof(s.ctx().right()));
    return p;
  }
  if (name == "wstar") {
    apply(at_root(RuleId::WStarR), s);
    return chain(s, {at_root(RuleId::E1), at_root(RuleId::W), at_root(RuleId::TopL), at_root(RuleId::E1),
                     at_root(RuleId::StarR)});
  }
  if (name == "botfromcut") {
    if (!formula) throw std::invalid_argument("botfromcut needs a formula");
    RuleInstance bl{RuleId::BotL, pos, formula, false};
    apply(bl, s);
    RuleInstance cut{RuleId::Cut, pos, formula, false};
    Proof p = chain(s, {cut});
    p.children[0] = chain(p.children[0].sequent, {at_root(RuleId::BotAx)});
    return p;
  }
  throw std::invalid_argument("unknown derived rule '" + name + "'");
}

}  // namespace bi
