#include "bi/vbi.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>

namespace bi {

VState VState::of(const Sequent& s, const std::string& w) {
  if (s.is_box()) throw std::invalid_argument("VState: the empty sequent has no state");
  return VState{w, s.ctx(), s.goal()};
}

// ---------------------------------------------------------------- certification

namespace {

using G = Builder::G;

MetaFormula S(const std::string& w, const Formula& f) { return MetaFormula::sat(w, f); }
MetaFormula S(const std::string& w, const Bunch& b) { return MetaFormula::sat(w, compact(b)); }

int last(G g) { return static_cast<int>(g->seq.ctx.size()) - 1; }

// One former on the path from the root to the active sub-bunch. For ';' both children
// live at x; for ',' R(x, a, b) holds with the children at a and b.
struct Frame {
  BKind former;
  std::string x, a, b;
  bool went_left;
  Bunch sibling;
};

class Certifier {
 public:
  explicit Certifier(NameSupply& ns) : b_(certification_theory(), ns), ns_(ns) {}

  std::vector<VState> hyps;

  // g is exactly w |= compact(Γ) : w |= χ for p.sequent = Γ : χ.
  void run(G g, const Proof& p, const std::string& w) {
    if (!p.rule) {
      if (p.sequent.is_box()) throw std::logic_error("certify: closed leaf reached");
      b_.hyp(g);
      hyps.push_back(VState::of(p.sequent, w));
      return;
    }
    const RuleInstance& r = *p.rule;
    const Bunch& gam = p.sequent.ctx();
    const Formula& chi = p.sequent.goal();
    std::vector<std::pair<G, std::string>> goals;

    switch (r.rule) {
      case RuleId::Id:
      case RuleId::Taut:
        split(g, w, gam);
        b_.close(g, S(w, chi));
        return;
      case RuleId::TopR:
        b_.verum(b_.resolve_right(g, "top_r", 0));
        return;
      case RuleId::BotAx:
        bot_ax(g, w, gam, r.position, chi);
        return;
      case RuleId::AndR: {
        auto [l, rr] = b_.andR(b_.resolve_right(g, "and_r", 0), 0);
        goals = {{l, w}, {rr, w}};
        break;
      }
      case RuleId::OrR1:
      case RuleId::OrR2: {
        g = b_.orR(b_.resolve_right(g, "or_r", 0), 0);
        goals = {{b_.wR(g, r.rule == RuleId::OrR1 ? 1 : 0), w}};
        break;
      }
      case RuleId::ImpR: {
        g = b_.resolve_right(g, "imp_r", 0);
        std::string u = ns_.fresh();
        g = b_.impR(b_.impR(b_.allR(g, u)));
        g = b_.derive(g, "persistence", {w, u, compact(gam).str()});
        g = b_.derive(g, "and_r", {u, compact(gam).str(), chi.left().str()});
        goals = {{b_.keep(g, {S(u, Bunch::semi(gam, Bunch::leaf(chi.left())))}, {S(u, chi.right())}), u}};
        break;
      }
      case RuleId::WandR: {
        g = b_.resolve_right(g, "wand_r", 0);
        std::string u = ns_.fresh();
        g = b_.allR(g, u);
        std::string y = ns_.fresh();
        g = b_.impR(b_.impR(b_.allR(g, y)));
        g = b_.derive(g, "star_r", {y, compact(gam).str(), chi.left().str()}, {w, u});
        goals = {{b_.keep(g, {S(y, Bunch::comma(gam, Bunch::leaf(chi.left())))}, {S(y, chi.right())}), y}};
        break;
      }
      case RuleId::StarR:
      case RuleId::WStarR: {
        split(g, w, gam);
        auto [a, c] = split(g, w, gam.right());
        g = b_.resolve_right(g, "star_r", 0);
        g = b_.exR(b_.exR(g, 0, a), 0, c);
        auto [rel, parts] = b_.andR(g, 0);
        b_.close(rel, MetaFormula::rel(w, a, c));
        auto [l, rr] = b_.andR(parts, 0);
        goals = {{b_.keep(l, {S(a, gam.right().left())}, {S(a, chi.left())}), a},
                 {b_.keep(rr, {S(c, gam.right().right())}, {S(c, chi.right())}), c}};
        break;
      }
      case RuleId::ImpL: goals = imp_l(g, w, gam, r.position, chi); break;
      case RuleId::WandL: goals = wand_l(g, w, gam, r.position, chi); break;
      case RuleId::Cut: goals = cut(g, w, gam, r.position, *r.formula, chi); break;
      case RuleId::OrL: goals = or_l(g, w, gam, r.position, chi); break;
      default: goals = {{context_rule(g, w, p.sequent, r, p.children.at(0).sequent), w}}; break;
    }
    if (goals.size() != p.children.size()) throw std::logic_error("certify: premiss count mismatch");
    for (std::size_t k = 0; k < goals.size(); ++k) run(goals[k].first, p.children[k], goals[k].second);
  }

 private:
  int at(G g, const MetaFormula& f) {
    int k = Builder::find(g->seq.ctx, f);
    if (k < 0) throw std::logic_error("certify: missing " + f.str() + " in " + g->seq.str());
    return k;
  }

  // Splits x |= compact(B) one level; returns the worlds of B's children.
  std::pair<std::string, std::string> split(G& g, const std::string& x, const Bunch& B) {
    if (B.is(BKind::Semi)) {
      g = b_.resolve_left(g, "and_l", at(g, S(x, B)));
      g = b_.andL(g, last(g));
      return {x, x};
    }
    if (!B.is(BKind::Comma)) throw std::logic_error("certify: split of a non-former");
    g = b_.resolve_left(g, "star_l", at(g, S(x, B)));
    std::string a = ns_.fresh();
    g = b_.exL(g, last(g), a);
    std::string c = ns_.fresh();
    g = b_.exL(g, last(g), c);
    g = b_.andL(g, last(g));
    g = b_.andL(g, last(g));
    return {a, c};
  }

  std::string descend(G& g, const std::string& w, const Bunch& root, const BunchPath& path, std::vector<Frame>& frames) {
    std::string x = w;
    Bunch B = root;
    for (Step st : path) {
      auto [a, c] = split(g, x, B);
      bool left = st == Step::L;
      frames.push_back(Frame{B.kind(), x, a, c, left, left ? B.right() : B.left()});
      x = left ? a : c;
      B = left ? B.left() : B.right();
    }
    return x;
  }

  // With x |= compact(B) for the new node, rebuilds the assertion at the root world.
  G ascend(G g, const std::vector<Frame>& frames, Bunch B) {
    for (auto it = frames.rbegin(); it != frames.rend(); ++it) {
      Bunch l = it->went_left ? B : it->sibling;
      Bunch r = it->went_left ? it->sibling : B;
      if (it->former == BKind::Semi)
        g = b_.derive(g, "and_r", {it->x, compact(l).str(), compact(r).str()});
      else
        g = b_.derive(g, "star_r", {it->x, compact(l).str(), compact(r).str()}, {it->a, it->b});
      B = Bunch::node(it->former, l, r);
    }
    return g;
  }

  // Adds R(x, z, y) given R(x, y, z).
  G comm(G g, const std::string& x, const std::string& y, const std::string& z) {
    g = b_.inst(g, "commutativity", {x, y, z});
    g = b_.andL(g, last(g));
    g = b_.wL(g, last(g));
    auto [l, r] = b_.impL(g, last(g));
    b_.close(l, MetaFormula::rel(x, y, z));
    return r;
  }

  void bot_ax(G g, const std::string& w, const Bunch& gam, const BunchPath& pos, const Formula& chi) {
    std::vector<Frame> frames;
    std::string v = descend(g, w, gam, pos, frames);
    g = b_.derive(g, "bot_l", {v});
    for (auto it = frames.rbegin(); it != frames.rend(); ++it) {
      if (it->former == BKind::Semi) continue;
      const std::string& child = it->went_left ? it->a : it->b;
      const std::string& other = it->went_left ? it->b : it->a;
      if (!it->went_left) g = comm(g, it->x, it->a, it->b);
      g = b_.derive(g, "pi_absorb", {it->x, child, other});
    }
    g = b_.derive(g, "absurdity", {w, chi.str()});
    b_.close(g, S(w, chi));
  }

  std::vector<std::pair<G, std::string>> imp_l(G g, const std::string& w, const Bunch& gam, const BunchPath& pos,
                                               const Formula& chi) {
    std::vector<Frame> frames;
    std::string v = descend(g, w, gam, pos, frames);
    const Bunch X = gam.at(pos);
    const Bunch& D = X.left();
    const Formula f = X.right().formula();
    split(g, v, X);
    g = b_.derive(g, "refl", {v});
    g = b_.resolve_left(g, "imp_l", at(g, S(v, f)));
    g = b_.allL(g, last(g), v);
    auto [l, r] = b_.impL(g, last(g));
    b_.close(l, MetaFormula::leq(v, v));
    auto [l2, r2] = b_.impL(r, last(r));
    G first = b_.keep(l2, {S(v, D)}, {S(v, f.left())});
    g = b_.derive(r2, "and_r", {v, compact(D).str(), f.right().str()});
    Bunch nb = Bunch::semi(D, Bunch::leaf(f.right()));
    g = ascend(g, frames, nb);
    G second = b_.keep(g, {S(w, replace(gam, pos, nb))}, {S(w, chi)});
    return {{first, v}, {second, w}};
  }

  std::vector<std::pair<G, std::string>> wand_l(G g, const std::string& w, const Bunch& gam, const BunchPath& pos,
                                                const Formula& chi) {
    std::vector<Frame> frames;
    std::string v = descend(g, w, gam, pos, frames);
    const Bunch X = gam.at(pos);
    const Bunch& D1 = X.left();
    const Bunch& D2 = X.right().left();
    const Formula f = X.right().right().formula();
    auto [a, y] = split(g, v, X);
    auto [c, d] = split(g, y, X.right());
    g = comm(g, y, c, d);
    g = b_.resolve_left(g, "wand_l", at(g, S(d, f)));
    g = b_.allL(g, last(g), c);
    g = b_.allL(g, last(g), y);
    auto [l, r] = b_.impL(g, last(g));
    b_.close(l, MetaFormula::rel(y, d, c));
    auto [l2, r2] = b_.impL(r, last(r));
    G first = b_.keep(l2, {S(c, D2)}, {S(c, f.left())});
    g = b_.derive(r2, "star_r", {v, compact(D1).str(), f.right().str()}, {a, y});
    Bunch nb = Bunch::comma(D1, Bunch::leaf(f.right()));
    g = ascend(g, frames, nb);
    G second = b_.keep(g, {S(w, replace(gam, pos, nb))}, {S(w, chi)});
    return {{first, c}, {second, w}};
  }

  std::vector<std::pair<G, std::string>> cut(G g, const std::string& w, const Bunch& gam, const BunchPath& pos,
                                             const Formula& phi, const Formula& chi) {
    std::vector<Frame> frames;
    std::string v = descend(g, w, gam, pos, frames);
    const Bunch X = gam.at(pos);
    g = b_.derive(g, "refl", {v});
    g = b_.inst(g, "persistence", {v, v, phi.str()});
    auto [l, r] = b_.impL(g, last(g));
    b_.close(l, MetaFormula::leq(v, v));
    auto [l2, r2] = b_.impL(r, last(r));
    G first = b_.keep(l2, {S(v, X)}, {S(v, phi)});
    Bunch nb = Bunch::leaf(phi);
    g = ascend(r2, frames, nb);
    G second = b_.keep(g, {S(w, replace(gam, pos, nb))}, {S(w, chi)});
    return {{first, v}, {second, w}};
  }

  std::vector<std::pair<G, std::string>> or_l(G g, const std::string& w, const Bunch& gam, const BunchPath& pos,
                                              const Formula& chi) {
    std::vector<Frame> frames;
    std::string v = descend(g, w, gam, pos, frames);
    const Formula f = gam.at(pos).formula();
    g = b_.resolve_left(g, "or_l", at(g, S(v, f)));
    auto [l, r] = b_.orL(g, last(g));
    std::vector<std::pair<G, std::string>> out;
    for (auto [goal, part] : {std::pair{l, f.left()}, std::pair{r, f.right()}}) {
      Bunch nb = Bunch::leaf(part);
      G k = ascend(goal, frames, nb);
      out.push_back({b_.keep(k, {S(w, replace(gam, pos, nb))}, {S(w, chi)}), w});
    }
    return out;
  }

 public:
  // Single-premiss context rules: rewrite the active sub-bunch X at its world v.
  G context_rule(G g, const std::string& w, const Sequent& concl, const RuleInstance& r, const Sequent& prem) {
    const Bunch& gam = concl.ctx();
    if (compact(gam) == compact(prem.ctx())) return g;  // AndL, StarL: the assertion is unchanged
    std::vector<Frame> frames;
    std::string v = descend(g, w, gam, r.position, frames);
    const Bunch X = gam.at(r.position);
    const Bunch nb = prem.ctx().at(r.position);
    auto str = [](const Bunch& b) { return compact(b).str(); };
    switch (r.rule) {
      case RuleId::Comm: {
        auto [a, c] = split(g, v, X);
        g = comm(g, v, a, c);
        g = b_.derive(g, "star_r", {v, str(X.right()), str(X.left())}, {c, a});
        break;
      }
      case RuleId::Asso: {
        auto [a, y] = split(g, v, X);
        auto [bb, c] = split(g, y, X.right());
        g = b_.derive(g, "associativity", {v, a, y, bb, c});
        std::string t = ns_.fresh();
        g = b_.andL(b_.exL(g, last(g), t), last(g));
        const Bunch ab = nb.left();
        g = b_.derive(g, "star_r", {t, str(ab.left()), str(ab.right())}, {a, bb});
        g = b_.derive(g, "star_r", {v, str(ab), str(nb.right())}, {t, c});
        break;
      }
      case RuleId::AssoInv: {
        auto [y, c] = split(g, v, X);
        auto [a, bb] = split(g, y, X.left());
        g = comm(g, v, y, c);
        g = comm(g, y, a, bb);
        g = b_.derive(g, "associativity", {v, c, y, bb, a});
        std::string t = ns_.fresh();
        g = b_.andL(b_.exL(g, last(g), t), last(g));
        g = comm(g, v, t, a);
        g = comm(g, t, c, bb);
        const Bunch bc = nb.right();
        g = b_.derive(g, "star_r", {t, str(bc.left()), str(bc.right())}, {bb, c});
        g = b_.derive(g, "star_r", {v, str(nb.left()), str(bc)}, {a, t});
        break;
      }
      case RuleId::E1:
        split(g, v, X);
        g = b_.derive(g, "and_r", {v, str(X.right()), str(X.left())});
        break;
      case RuleId::E2:
        split(g, v, X);
        split(g, v, X.right());
        g = b_.derive(g, "and_r", {v, str(X.left()), str(X.right().left())});
        g = b_.derive(g, "and_r", {v, str(nb.left()), str(nb.right())});
        break;
      case RuleId::W: split(g, v, X); break;
      case RuleId::C: g = b_.derive(g, "and_r", {v, str(X), str(X)}); break;
      case RuleId::TopL:
        g = b_.derive(g, "top_r", {v});
        g = b_.derive(g, "and_r", {v, str(X), "T"});
        break;
      case RuleId::MultTopL1: {
        auto [a, u] = split(g, v, X);
        g = b_.derive(g, "mtop_l", {u});
        g = b_.derive(g, "unit_mono", {v, a, u});
        g = b_.derive(g, "persistence", {a, v, str(X.left())});
        break;
      }
      case RuleId::MultTopL2:
        g = b_.derive(g, "unitality", {v});
        g = b_.derive(g, "refl", {"e"});
        g = b_.derive(g, "mtop_r", {"e"});
        g = b_.derive(g, "star_r", {v, str(X), "I"}, {v, "e"});
        break;
      case RuleId::BotL:
        g = b_.derive(g, "bot_l", {v});
        g = b_.derive(g, "absurdity", {v, r.formula->str()});
        break;
      default:
        throw std::logic_error("certify: no certificate for " + rule_name(r.rule));
    }
    g = ascend(g, frames, nb);
    return b_.keep(g, {S(w, prem.ctx())}, {S(w, prem.goal())});
  }

 private:
  Builder b_;
  NameSupply& ns_;
};

}  // namespace

Certified certify(const Proof& p, const std::string& w, NameSupply& names) {
  if (p.sequent.is_box()) throw std::invalid_argument("certify: the empty sequent");
  names.reserve(w);
  Certified out;
  out.derivation.seq = embed(p.sequent, w);
  Certifier c(names);
  c.run(&out.derivation, p, w);
  out.hyps = std::move(c.hyps);
  return out;
}

// ---------------------------------------------------------------- reduction and proving

namespace {

// Realizes a step at its source and appends the rearrangement of each premiss into normal form.
Proof realize_normal(const Sequent& src, const Alternative& alt) {
  Proof p = realize(src, alt);
  std::function<void(Proof&)> go = [&](Proof& q) {
    if (!q.rule) {
      if (q.sequent.is_box()) return;
      auto steps = rearrangement_steps(q.sequent.ctx(), normalize(q.sequent.ctx()));
      if (!steps.empty()) q = chain(q.sequent, steps);
      return;
    }
    for (auto& k : q.children) go(k);
  };
  go(p);
  return p;
}

// Replaces hyp leaves, in preorder, by the given derivations.
void plug_in_order(MetaDerivation& d, std::vector<MetaDerivation>& subs, std::size_t& k) {
  if (d.rule == "hyp") {
    if (k >= subs.size()) throw std::logic_error("plug: too few derivations");
    d = std::move(subs[k++]);
    return;
  }
  for (auto& c : d.kids) plug_in_order(c, subs, k);
}

}  // namespace

std::vector<VAlternative> vbi_reduce(const VState& v, const SearchPolicy& policy, bool certify_steps) {
  const Sequent s = normalize(v.sequent());
  std::vector<VAlternative> out;
  for (auto& alt : alternatives(s, policy)) {
    VAlternative va{alt, {}, std::nullopt};
    if (certify_steps) {
      NameSupply ns;
      Certified c = certify(realize_normal(s, alt), v.world, ns);
      va.premisses = std::move(c.hyps);
      va.fragment = std::move(c.derivation);
    } else {
      for (const auto& p : alt.premisses) va.premisses.push_back(VState::of(p, v.world));
    }
    out.push_back(std::move(va));
  }
  return out;
}

VbiResult vbi_prove(const Sequent& s, const SearchPolicy& policy) {
  if (s.is_box()) throw std::invalid_argument("vbi_prove: the empty sequent");
  SuccessorFn succ = [&policy](const Sequent& q) {
    std::vector<Alternative> alts;
    for (auto& va : vbi_reduce(VState::of(q), policy, false)) alts.push_back(std::move(va.alt));
    return alts;
  };
  MacroResult mr = search(s, policy, succ);
  VbiResult res;
  res.reason = mr.reason;
  res.depth = mr.depth;
  res.expanded = mr.expanded;
  if (!mr.proof) return res;

  NameSupply ns;
  ns.reserve("w");
  std::function<std::pair<std::shared_ptr<const VNode>, MetaDerivation>(const MacroNode&, const std::string&)> build =
      [&](const MacroNode& m, const std::string& world) {
        auto node = std::make_shared<VNode>();
        node->state = VState::of(m.sequent, world);
        node->alt = m.alt;
        Certified c = certify(realize_normal(m.sequent, m.alt), world, ns);
        if (c.hyps.size() != m.kids.size()) throw std::logic_error("vbi_prove: premiss count mismatch");
        std::vector<MetaDerivation> subs;
        for (std::size_t k = 0; k < m.kids.size(); ++k) {
          if (!(c.hyps[k].sequent() == m.kids[k]->sequent)) throw std::logic_error("vbi_prove: premiss mismatch");
          auto [kid, d] = build(*m.kids[k], c.hyps[k].world);
          node->kids.push_back(kid);
          subs.push_back(std::move(d));
        }
        std::size_t used = 0;
        plug_in_order(c.derivation, subs, used);
        return std::pair{std::shared_ptr<const VNode>(node), std::move(c.derivation)};
      };
  auto [root, d] = build(*mr.proof, "w");
  if (!(s == mr.proof->sequent)) {
    Certified pre = certify(chain(s, rearrangement_steps(s.ctx(), mr.proof->sequent.ctx())), "w", ns);
    std::vector<MetaDerivation> subs;
    subs.push_back(std::move(d));
    std::size_t used = 0;
    plug_in_order(pre.derivation, subs, used);
    d = std::move(pre.derivation);
  }
  res.proof = root;
  res.derivation = std::move(d);
  return res;
}

bool isomorphic(const MacroNode& a, const VNode& b) {
  if (a.alt.rule != b.alt.rule || a.alt.phases.size() != b.alt.phases.size() || a.kids.size() != b.kids.size())
    return false;
  for (std::size_t i = 0; i < a.alt.phases.size(); ++i) {
    const Phase& x = a.alt.phases[i];
    const Phase& y = b.alt.phases[i];
    if (!(x.inst == y.inst) || x.target.has_value() != y.target.has_value() || (x.target && !(*x.target == *y.target)))
      return false;
  }
  if (!(a.sequent == b.state.sequent())) return false;
  for (std::size_t k = 0; k < a.kids.size(); ++k)
    if (!isomorphic(*a.kids[k], *b.kids[k])) return false;
  return true;
}

DljCheck check_certificate(const MetaDerivation& d, bool allow_hyp) {
  DljCheck c = check_dlj(d, DljOptions{false, allow_hyp, &certification_theory()});
  if (c && !world_conservative(d)) return DljCheck{false, {}, "derivation is not world-conservative"};
  return c;
}

// ---------------------------------------------------------------- spot checks

std::vector<RuleId> spot_rules() { return {RuleId::AndR, RuleId::OrR1, RuleId::OrR2, RuleId::ImpR, RuleId::WandR}; }

std::vector<std::vector<Sequent>> spot_direct(RuleId r, const Sequent& s) {
  if (s.is_box()) return {};
  const Bunch& g = s.ctx();
  const Formula& f = s.goal();
  auto n = [](Bunch b, Formula x) { return normalize(Sequent::make(std::move(b), std::move(x))); };
  switch (r) {
    case RuleId::AndR:
      if (f.is(FKind::And)) return {{n(g, f.left()), n(g, f.right())}};
      return {};
    case RuleId::OrR1:
      if (f.is(FKind::Or)) return {{n(g, f.left())}};
      return {};
    case RuleId::OrR2:
      if (f.is(FKind::Or)) return {{n(g, f.right())}};
      return {};
    case RuleId::ImpR:
      if (f.is(FKind::Imp)) return {{n(Bunch::semi(g, Bunch::leaf(f.left())), f.right())}};
      return {};
    case RuleId::WandR:
      if (f.is(FKind::Wand)) return {{n(Bunch::comma(g, Bunch::leaf(f.left())), f.right())}};
      return {};
    default:
      throw std::invalid_argument("spot_direct: not a spot-check rule");
  }
}

std::vector<std::vector<Sequent>> spot_meta(RuleId r, const Sequent& s) {
  if (s.is_box()) return {};
  const FKind want = r == RuleId::AndR ? FKind::And
                     : r == RuleId::ImpR ? FKind::Imp
                     : r == RuleId::WandR ? FKind::Wand
                                          : FKind::Or;
  if (r != RuleId::AndR && r != RuleId::OrR1 && r != RuleId::OrR2 && r != RuleId::ImpR && r != RuleId::WandR)
    throw std::invalid_argument("spot_meta: not a spot-check rule");
  if (!s.goal().is(want)) return {};
  const char* clause = want == FKind::And ? "and" : want == FKind::Or ? "or" : want == FKind::Imp ? "imp" : "wand";
  NameSupply ns;
  Resolution res = resolve(embed(s, "w"), clause, Side::Right, 0, ns);
  const MetaFormula& e = res.premiss.ext.at(0);
  const Bunch& g = s.ctx();
  auto n = [](Bunch b, Formula x) { return normalize(Sequent::make(std::move(b), std::move(x))); };
  auto at_w = [](const MetaFormula& a) { return a.is(MK::Sat) && a.worlds()[0] == "w"; };
  switch (want) {
    case FKind::And:
      if (e.is(MK::And) && at_w(e.left()) && at_w(e.right()))
        return {{n(g, e.left().formula()), n(g, e.right().formula())}};
      break;
    case FKind::Or:
      if (e.is(MK::Or) && at_w(e.left()) && at_w(e.right()))
        return {{n(g, (r == RuleId::OrR1 ? e.left() : e.right()).formula())}};
      break;
    default: {
      // guard => (sat(u, A) => sat(t, B)): a <= guard extends additively, an R guard multiplicatively.
      if (!e.is(MK::Imp) || !e.right().is(MK::Imp)) break;
      const MetaFormula& guard = e.left();
      const MetaFormula& a = e.right().left();
      const MetaFormula& b = e.right().right();
      if (!a.is(MK::Sat) || !b.is(MK::Sat)) break;
      if (guard.is(MK::Leq) && guard.worlds()[0] == "w" && a.worlds()[0] == guard.worlds()[1] &&
          b.worlds()[0] == guard.worlds()[1])
        return {{n(Bunch::semi(g, Bunch::leaf(a.formula())), b.formula())}};
      if (guard.is(MK::Rel) && guard.worlds()[1] == "w" && a.worlds()[0] == guard.worlds()[2] &&
          b.worlds()[0] == guard.worlds()[0])
        return {{n(Bunch::comma(g, Bunch::leaf(a.formula())), b.formula())}};
      break;
    }
  }
  return {};
}

// ---------------------------------------------------------------- bisimulation

namespace {

std::string set_key(std::vector<Sequent> ps) {
  std::sort(ps.begin(), ps.end());
  std::string k;
  for (std::size_t i = 0; i < ps.size(); ++i) k += (i ? "; " : "") + ps[i].str();
  return ps.empty() ? "[]" : k;
}

std::set<std::string> spot_keys(const std::vector<std::vector<Sequent>>& sets, const Sequent& concl) {
  std::set<std::string> out;
  for (const auto& ps : sets)
    if (std::find(ps.begin(), ps.end(), concl) == ps.end()) out.insert(set_key(ps));
  return out;
}

}  // namespace

bool BisimResult::bisimilar() const {
  if (capped) return false;
  return std::all_of(nodes.begin(), nodes.end(), [](const BisimNode& n) { return n.ok(); });
}

std::size_t BisimResult::matched() const {
  std::size_t k = 0;
  for (const auto& n : nodes) k += n.matched.size();
  return k;
}

std::size_t BisimResult::unmatched() const {
  std::size_t k = 0;
  for (const auto& n : nodes) k += n.unmatched_slbi.size() + n.unmatched_vbi.size() + n.spot.size();
  return k;
}

std::string BisimResult::report() const {
  std::string s;
  for (const auto& n : nodes) {
    if (n.ok()) continue;
    s += "state " + n.state.str() + " (depth " + std::to_string(n.depth) + ")\n";
    for (const auto& m : n.unmatched_slbi) s += "  only in sLBI: " + m + "\n";
    for (const auto& m : n.unmatched_vbi) s += "  only in VBI: " + m + "\n";
    for (const auto& m : n.spot) s += "  spot check: " + m + "\n";
  }
  s += std::string(bisimilar() ? "bisimilar" : "NOT bisimilar") + ": " + std::to_string(nodes.size()) + " states, " +
       std::to_string(matched()) + " matched premiss-sets, " + std::to_string(unmatched()) + " unmatched" +
       (capped ? ", state cap reached" : "") + "\n";
  return s;
}

nlohmann::json BisimResult::to_json() const {
  nlohmann::json j;
  j["bisimilar"] = bisimilar();
  j["states"] = nodes.size();
  j["matched"] = matched();
  j["unmatched"] = unmatched();
  j["capped"] = capped;
  nlohmann::json ns = nlohmann::json::array();
  for (const auto& n : nodes)
    ns.push_back({{"state", n.state.str()},
                  {"depth", n.depth},
                  {"matched", n.matched},
                  {"unmatched_slbi", n.unmatched_slbi},
                  {"unmatched_vbi", n.unmatched_vbi},
                  {"spot", n.spot}});
  j["nodes"] = ns;
  return j;
}

BisimResult bisim_check(const Sequent& s, int depth, const SearchPolicy& policy, const BisimOptions& opt) {
  if (s.is_box()) throw std::invalid_argument("bisim_check: the empty sequent");
  BisimResult res;
  std::set<Sequent> seen;
  std::deque<std::pair<Sequent, int>> queue;
  const Sequent root = normalize(s);
  queue.emplace_back(root, 0);
  seen.insert(root);
  while (!queue.empty()) {
    auto [q, d] = queue.front();
    queue.pop_front();
    BisimNode node;
    node.state = q;
    node.depth = d;

    const auto slbi = alternatives(q, policy);
    const auto vbi = vbi_reduce(VState::of(q), policy, opt.check_fragments);
    std::multiset<std::string> vkeys, skeys;
    for (const auto& a : slbi) skeys.insert(set_key(a.premisses));
    for (const auto& va : vbi) {
      std::vector<Sequent> ps;
      for (const auto& p : va.premisses) ps.push_back(p.sequent());
      vkeys.insert(set_key(ps));
      const std::string label = rule_name(va.alt.rule) + ": " + set_key(ps);
      if (!skeys.count(set_key(ps))) node.unmatched_vbi.push_back(label);
      if (va.fragment) {
        DljCheck c = check_certificate(*va.fragment, true);
        auto hs = va.fragment->hyps();
        bool hyps_ok = hs.size() == va.premisses.size();
        for (std::size_t k = 0; hyps_ok && k < hs.size(); ++k)
          hyps_ok = same_multiset(hs[k]->seq, va.premisses[k].bvs());
        if (!c) node.unmatched_vbi.push_back("uncertified " + label + ": " + c.message);
        else if (!hyps_ok) node.unmatched_vbi.push_back("fragment premisses differ " + label);
      }
    }
    std::set<std::string> all_keys;
    std::map<RuleId, std::set<std::string>> by_rule;
    for (const auto& a : slbi) {
      const std::string k = set_key(a.premisses);
      all_keys.insert(k);
      by_rule[a.rule].insert(k);
      if (vkeys.count(k)) node.matched.push_back(rule_name(a.rule) + ": " + k);
      else node.unmatched_slbi.push_back(rule_name(a.rule) + ": " + k);
    }
    for (RuleId r : spot_rules()) {
      auto direct = spot_keys(spot_direct(r, q), q);
      auto meta = spot_keys(spot_meta(r, q), q);
      if (direct != meta) node.spot.push_back(rule_name(r) + ": direct and resolution-based premisses differ");
      for (const auto& k : by_rule[r])
        if (!direct.count(k)) node.spot.push_back(rule_name(r) + ": table premisses " + k + " not derivable directly");
      for (const auto& k : direct)
        if (!all_keys.count(k)) node.spot.push_back(rule_name(r) + ": missing from table: " + k);
    }

    if (d + 1 < depth)
      for (const auto& a : slbi)
        for (const auto& p : a.premisses) {
          if (p.is_box() || seen.count(p)) continue;
          if (seen.size() >= opt.node_cap) {
            res.capped = true;
            continue;
          }
          seen.insert(p);
          queue.emplace_back(p, d + 1);
        }
    res.nodes.push_back(std::move(node));
  }
  return res;
}

}  // namespace bi
