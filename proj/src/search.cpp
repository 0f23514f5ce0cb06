#include "bi/search.hpp"

#include <algorithm>
#include <climits>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace bi {

std::vector<RuleId> default_rule_order() {
  using R = RuleId;
  return {R::TopR, R::Id, R::BotAx, R::AndL, R::StarL, R::MultTopL1, R::ImpR, R::WandR, R::AndR, R::OrL,
          R::OrR1, R::OrR2, R::ImpL, R::WandL, R::StarR, R::W, R::C, R::Cut};
}

bool is_invertible(RuleId r) {
  switch (r) {
    case RuleId::AndL: case RuleId::StarL: case RuleId::MultTopL1: case RuleId::ImpR: case RuleId::WandR:
    case RuleId::AndR: case RuleId::OrL:
      return true;
    default:
      return false;
  }
}

std::string reason_str(Unproven u) {
  switch (u) {
    case Unproven::None: return "proved";
    case Unproven::DepthExhausted: return "depth-exhausted";
    case Unproven::ExhaustedSpace: return "exhausted-space";
  }
  return "?";
}

namespace {

// n-ary view of a normalized bunch.
struct Element {
  BunchPath path;
  Bunch node;
  int list = -1;  // index into View::lists; -1 for the root
};

struct List {
  BunchPath path;
  BKind kind;
  std::vector<int> elems;  // indices into View::elements
};

struct View {
  std::vector<Element> elements;
  std::vector<List> lists;

  explicit View(const Bunch& root) { walk(root, {}, -1); }

 private:
  void walk(const Bunch& b, BunchPath p, int list) {
    elements.push_back({p, b, list});
    if (!b.is_former()) return;
    const BKind f = b.kind();
    List l{p, f, {}};
    std::vector<BunchPath> paths;
    BunchPath cur = p;
    const Bunch* c = &b;
    while (c->kind() == f) {
      BunchPath r = cur;
      r.push_back(Step::R);
      paths.push_back(r);
      cur.push_back(Step::L);
      c = &c->left();
    }
    paths.push_back(cur);
    std::reverse(paths.begin(), paths.end());
    const int li = static_cast<int>(lists.size());
    lists.push_back(l);
    for (const auto& ep : paths) {
      const int ei = static_cast<int>(elements.size());
      lists[li].elems.push_back(ei);
      walk(b.at(BunchPath(ep.begin() + static_cast<long>(p.size()), ep.end())), ep, li);
    }
  }
};

Bunch of(BKind f, const std::vector<Bunch>& xs) {
  if (xs.empty()) return f == BKind::Semi ? Bunch::add_unit() : Bunch::mult_unit();
  return build(f, xs);
}

bool contains_implication(const Bunch& b) {
  if (b.is(BKind::Leaf)) return b.formula().is(FKind::Imp) || b.formula().is(FKind::Wand);
  if (b.is_former()) return contains_implication(b.left()) || contains_implication(b.right());
  return false;
}

RuleInstance ri(RuleId r, BunchPath p = {}) { return {r, std::move(p), std::nullopt, false}; }

// Runs the phases on a representative and returns the raw premisses of the last one.
std::vector<Sequent> run_phases(const Sequent& s, const std::vector<Phase>& phases) {
  Sequent cur = s;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    if (phases[i].target) cur = Sequent::make(*phases[i].target, cur.goal());
    auto prem = apply(phases[i].inst, cur);
    if (i + 1 == phases.size()) return prem;
    cur = prem.at(0);
  }
  throw std::logic_error("run_phases: no phases");
}

class AltBuilder {
 public:
  AltBuilder(const Sequent& s, const SearchPolicy& pol) : s_(s), n_(s.ctx()), view_(n_), pol_(pol) {
    self_ = s_.str();
  }

  void add(RuleId r, std::vector<Phase> phases) {
    std::vector<Sequent> prem;
    prem = run_phases(s_, phases);
    for (auto& p : prem) p = normalize(p);
    std::vector<std::string> key;
    for (const auto& p : prem) {
      std::string k = p.str();
      if (k == self_) return;
      key.push_back(std::move(k));
    }
    std::sort(key.begin(), key.end());
    key.erase(std::unique(key.begin(), key.end()), key.end());
    std::string joined;
    for (auto& k : key) joined += k + "\n";
    if (!seen_.insert(joined).second) return;
    out.push_back({r, std::move(phases), std::move(prem)});
  }

  void generate(RuleId r) {
    const Formula& g = s_.goal();
    const Phase here{std::nullopt, ri(r)};
    switch (r) {
      case RuleId::TopR:
        if (g.is(FKind::Top)) add(r, {here});
        break;
      case RuleId::AndR:
        if (g.is(FKind::And)) add(r, {here});
        break;
      case RuleId::OrR1:
      case RuleId::OrR2:
        if (g.is(FKind::Or)) add(r, {here});
        break;
      case RuleId::ImpR:
        if (g.is(FKind::Imp)) add(r, {here});
        break;
      case RuleId::WandR:
        if (g.is(FKind::Wand)) add(r, {here});
        break;
      case RuleId::Id: gen_id(); break;
      case RuleId::BotAx:
      case RuleId::AndL:
      case RuleId::StarL:
      case RuleId::OrL: gen_leaf_rule(r); break;
      case RuleId::MultTopL1: gen_mtop_leaf(); break;
      case RuleId::ImpL: gen_impl(); break;
      case RuleId::WandL: gen_wandl(); break;
      case RuleId::StarR: gen_starr(); break;
      case RuleId::W: gen_w(); break;
      case RuleId::C: gen_c(); break;
      case RuleId::Cut: if (pol_.include_cut) gen_cut(); break;
      default: break;
    }
  }

  std::vector<Alternative> out;

 private:
  // Elements of the top additive group: the root's Semi list, or the root itself.
  std::vector<int> tops() const {
    if (n_.is(BKind::Semi)) return view_.lists[0].elems;
    return {0};
  }

  std::vector<Bunch> nodes(const std::vector<int>& idx) const {
    std::vector<Bunch> out;
    for (int i : idx) out.push_back(view_.elements[i].node);
    return out;
  }

  void gen_id() {
    const Formula& g = s_.goal();
    auto ts = tops();
    for (std::size_t j = 0; j < ts.size(); ++j) {
      const Element& e = view_.elements[ts[j]];
      const bool exact = e.node.is(BKind::Leaf) && e.node.formula() == g;
      const bool unit = g.is(FKind::MultTop) && e.node.is(BKind::MultUnit);
      if (!exact && !unit) continue;
      std::vector<int> others = ts;
      others.erase(others.begin() + static_cast<long>(j));
      const Bunch target = Bunch::semi(of(BKind::Semi, nodes(others)), Bunch::leaf(g));
      if (exact) {
        add(RuleId::Id, {{target, ri(RuleId::Id)}});
      } else {
        RuleInstance to_formula{RuleId::MultTopL2, e.path, std::nullopt, true};
        add(RuleId::Id, {{n_, to_formula}, {target, ri(RuleId::Id)}});
      }
      return;
    }
  }

  void gen_leaf_rule(RuleId r) {
    const FKind want = r == RuleId::BotAx ? FKind::Bottom
                       : r == RuleId::AndL ? FKind::And
                       : r == RuleId::StarL ? FKind::Star
                                            : FKind::Or;
    for (const Element& e : view_.elements) {
      if (!e.node.is(BKind::Leaf) || !e.node.formula().is(want)) continue;
      add(r, {{n_, ri(r, e.path)}});
    }
  }

  void gen_mtop_leaf() {
    for (const Element& e : view_.elements) {
      if (!e.node.is(BKind::Leaf) || !e.node.formula().is(FKind::MultTop)) continue;
      RuleInstance add_unit{RuleId::MultTopL2, e.path, std::nullopt, false};
      add(RuleId::MultTopL1, {{n_, add_unit}, {std::nullopt, ri(RuleId::Comm, e.path)},
                              {std::nullopt, ri(RuleId::MultTopL1, e.path)}});
    }
  }

  template <class F>
  static void subsets(std::size_t k, F&& f) {
    if (k > 16) throw SearchBudgetExceeded("bunch too wide for subset enumeration");
    for (unsigned mask = 0; mask < (1u << k); ++mask) f(mask);
  }

  void gen_impl() {
    for (const Element& e : view_.elements) {
      if (!e.node.is(BKind::Leaf) || !e.node.formula().is(FKind::Imp)) continue;
      if (e.list >= 0 && view_.lists[e.list].kind == BKind::Semi) {
        const List& l = view_.lists[e.list];
        std::vector<Bunch> others;
        for (int ei : l.elems)
          if (view_.elements[ei].path != e.path) others.push_back(view_.elements[ei].node);
        subsets(others.size(), [&](unsigned mask) {
          std::vector<Bunch> delta, rest;
          for (std::size_t i = 0; i < others.size(); ++i) ((mask >> i) & 1u ? delta : rest).push_back(others[i]);
          const Bunch inner = Bunch::semi(of(BKind::Semi, delta), e.node);
          BunchPath at = l.path;
          Bunch node = inner;
          if (!rest.empty()) {
            node = Bunch::semi(build(BKind::Semi, rest), inner);
            at.push_back(Step::R);
          }
          add(RuleId::ImpL, {{replace(n_, l.path, node), ri(RuleId::ImpL, at)}});
        });
      } else {
        const Bunch node = Bunch::semi(Bunch::add_unit(), e.node);
        add(RuleId::ImpL, {{replace(n_, e.path, node), ri(RuleId::ImpL, e.path)}});
      }
    }
  }

  void gen_wandl() {
    for (const Element& e : view_.elements) {
      if (!e.node.is(BKind::Leaf) || !e.node.formula().is(FKind::Wand)) continue;
      if (e.list >= 0 && view_.lists[e.list].kind == BKind::Comma) {
        const List& l = view_.lists[e.list];
        std::vector<Bunch> others;
        for (int ei : l.elems)
          if (view_.elements[ei].path != e.path) others.push_back(view_.elements[ei].node);
        subsets(others.size(), [&](unsigned mask) {
          std::vector<Bunch> d2, d1;
          for (std::size_t i = 0; i < others.size(); ++i) ((mask >> i) & 1u ? d2 : d1).push_back(others[i]);
          const Bunch node =
              Bunch::comma(of(BKind::Comma, d1), Bunch::comma(of(BKind::Comma, d2), e.node));
          add(RuleId::WandL, {{replace(n_, l.path, node), ri(RuleId::WandL, l.path)}});
        });
      } else {
        const Bunch node = Bunch::comma(Bunch::mult_unit(), Bunch::comma(Bunch::mult_unit(), e.node));
        add(RuleId::WandL, {{replace(n_, e.path, node), ri(RuleId::WandL, e.path)}});
      }
    }
  }

  void gen_starr() {
    if (!s_.goal().is(FKind::Star)) return;
    const auto ts = tops();
    const std::vector<Bunch> tb = nodes(ts);
    subsets(tb.size(), [&](unsigned umask) {
      if (umask == 0) return;
      std::vector<Bunch> chosen, others;
      for (std::size_t i = 0; i < tb.size(); ++i) ((umask >> i) & 1u ? chosen : others).push_back(tb[i]);
      const Bunch gamma = of(BKind::Semi, others);
      auto emit = [&](const Bunch& d1, const Bunch& d2) {
        add(RuleId::StarR, {{Bunch::semi(gamma, Bunch::comma(d1, d2)), ri(RuleId::StarR)}});
      };
      if (chosen.size() == 1) {
        const Bunch& e = chosen[0];
        std::vector<Bunch> cs = e.is(BKind::Comma) ? flatten(e, BKind::Comma) : std::vector<Bunch>{e};
        subsets(cs.size(), [&](unsigned m) {
          std::vector<Bunch> a, b;
          for (std::size_t i = 0; i < cs.size(); ++i) ((m >> i) & 1u ? a : b).push_back(cs[i]);
          emit(of(BKind::Comma, a), of(BKind::Comma, b));
        });
      } else {
        const Bunch e = build(BKind::Semi, chosen);
        emit(e, Bunch::mult_unit());
        emit(Bunch::mult_unit(), e);
      }
    });
  }

  void gen_w() {
    for (const List& l : view_.lists) {
      if (l.kind != BKind::Semi) continue;
      for (std::size_t j = 0; j < l.elems.size(); ++j) {
        std::vector<Bunch> others;
        for (std::size_t i = 0; i < l.elems.size(); ++i)
          if (i != j) others.push_back(view_.elements[l.elems[i]].node);
        const Bunch node = Bunch::semi(build(BKind::Semi, others), view_.elements[l.elems[j]].node);
        add(RuleId::W, {{replace(n_, l.path, node), ri(RuleId::W, l.path)}});
      }
    }
  }

  void gen_c() {
    for (const Element& e : view_.elements) {
      if (e.node.is(BKind::Semi) || !contains_implication(e.node)) continue;
      int copies = 1;
      if (e.list >= 0 && view_.lists[e.list].kind == BKind::Semi) {
        copies = 0;
        for (int ei : view_.lists[e.list].elems)
          if (view_.elements[ei].node == e.node) ++copies;
      }
      if (copies >= pol_.contraction_copies) continue;
      add(RuleId::C, {{n_, ri(RuleId::C, e.path)}});
    }
  }

  void gen_cut() {
    const auto cuts = subformulas(s_);
    for (const Element& e : view_.elements) {
      for (const Formula& f : cuts) {
        RuleInstance c{RuleId::Cut, e.path, f, false};
        add(RuleId::Cut, {{n_, c}});
      }
    }
  }

  const Sequent& s_;
  Bunch n_;
  View view_;
  const SearchPolicy& pol_;
  std::string self_;
  std::set<std::string> seen_;
};

}  // namespace

std::vector<Alternative> alternatives(const Sequent& s0, const SearchPolicy& policy) {
  if (s0.is_box()) return {};
  const Sequent s = normalize(s0);
  AltBuilder b(s, policy);
  const auto order = policy.rule_order.empty() ? default_rule_order() : policy.rule_order;
  for (RuleId r : order) b.generate(r);
  return std::move(b.out);
}

std::vector<std::vector<Sequent>> reduce(const Sequent& s, const SearchPolicy& policy) {
  std::vector<std::vector<Sequent>> out;
  for (auto& a : alternatives(s, policy)) out.push_back(std::move(a.premisses));
  return out;
}

Proof realize(const Sequent& raw, const Alternative& alt) {
  std::vector<RuleInstance> steps;
  Sequent cur = raw;
  for (std::size_t i = 0; i < alt.phases.size(); ++i) {
    const Phase& ph = alt.phases[i];
    if (ph.target && !(cur.ctx() == *ph.target)) {
      for (auto& st : rearrangement_steps(cur.ctx(), *ph.target)) {
        cur = apply(st, cur).at(0);
        steps.push_back(std::move(st));
      }
    }
    steps.push_back(ph.inst);
    if (i + 1 < alt.phases.size()) cur = apply(ph.inst, cur).at(0);
  }
  Proof p = chain(raw, steps);
  const Proof* last = &p;
  for (std::size_t k = 0; k + 1 < steps.size(); ++k) last = &last->children[0];
  if (!alt.premisses.empty()) {
    if (last->children.size() != alt.premisses.size()) throw std::logic_error("realize: premiss count mismatch");
    for (std::size_t i = 0; i < alt.premisses.size(); ++i)
      if (!(normalize(last->children[i].sequent) == alt.premisses[i])) throw std::logic_error("realize: premiss mismatch");
  }
  return p;
}

namespace {
// Open leaves of a realized step, in order.
std::vector<Proof*> open_leaves(Proof& p) {
  std::vector<Proof*> out;
  std::function<void(Proof&)> go = [&](Proof& q) {
    if (!q.rule) {
      if (!q.sequent.is_box()) out.push_back(&q);
      return;
    }
    for (auto& c : q.children) go(c);
  };
  go(p);
  return out;
}
}  // namespace

Proof materialize(const Sequent& raw, const MacroNode& m) {
  Proof p = realize(raw, m.alt);
  auto leaves = open_leaves(p);
  if (leaves.size() != m.kids.size()) throw std::logic_error("materialize: shape mismatch");
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    const Sequent leaf = leaves[i]->sequent;
    *leaves[i] = materialize(leaf, *m.kids[i]);
  }
  return p;
}

// ---------------------------------------------------------------- space

SearchSpace space(const Sequent& s, const SearchPolicy& policy) {
  SearchSpace sp;
  sp.root_raw = s;
  sp.nodes.push_back({normalize(s), 0, false, false, {}});
  if (s.is_box()) return sp;
  std::vector<std::string> ancestors;
  std::function<void(int)> expand = [&](int id) {
    const Sequent seq = sp.nodes[id].sequent;
    const std::string key = seq.str();
    const int depth = sp.nodes[id].depth;
    if (policy.loop_check && std::find(ancestors.begin(), ancestors.end(), key) != ancestors.end()) {
      sp.nodes[id].looped = true;
      return;
    }
    if (depth >= policy.depth) {
      sp.nodes[id].truncated = true;
      return;
    }
    ancestors.push_back(key);
    for (auto& alt : alternatives(seq, policy)) {
      SpaceEdge e{alt, {}};
      std::vector<Sequent> kids = alt.premisses;
      if (kids.empty()) kids.push_back(Sequent::box());
      for (auto& k : kids) {
        if (sp.nodes.size() >= policy.node_cap) {
          sp.capped = true;
          break;
        }
        e.children.push_back(static_cast<int>(sp.nodes.size()));
        sp.nodes.push_back({k, depth + 1, false, false, {}});
      }
      const int edge_index = static_cast<int>(sp.nodes[id].edges.size());
      sp.nodes[id].edges.push_back(std::move(e));
      if (sp.capped) break;
      for (int c : sp.nodes[id].edges[edge_index].children)
        if (!sp.nodes[c].sequent.is_box()) expand(c);
    }
    ancestors.pop_back();
  };
  expand(0);
  return sp;
}

namespace {
std::string dot_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '"' || c == '\\') o += '\\';
    o += c;
  }
  return o;
}
}  // namespace

std::string SearchSpace::to_dot() const {
  std::ostringstream o;
  o << "digraph space {\n  node [shape=box, fontname=\"monospace\"];\n";
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    o << "  n" << i << " [label=\"" << (n.sequent.is_box() ? std::string("[]") : dot_escape(n.sequent.str())) << "\"";
    if (n.looped) o << ", style=dashed";
    else if (n.truncated) o << ", style=dotted";
    o << "];\n";
    for (std::size_t k = 0; k < n.edges.size(); ++k) {
      o << "  e" << i << "_" << k << " [shape=point, xlabel=\"" << rule_name(n.edges[k].alt.rule) << "\"];\n";
      o << "  n" << i << " -> e" << i << "_" << k << " [arrowhead=none];\n";
      for (int c : n.edges[k].children) o << "  e" << i << "_" << k << " -> n" << c << ";\n";
    }
  }
  o << "}\n";
  return o.str();
}

void extract_reductions(const SearchSpace& sp, const std::function<bool(const Reduction&)>& visit) {
  Reduction cur;
  std::function<bool(std::vector<int>)> go = [&](std::vector<int> pending) -> bool {
    if (pending.empty()) {
      Reduction r = cur;
      r.successful = std::all_of(r.leaves.begin(), r.leaves.end(),
                                 [&](int l) { return sp.nodes[l].sequent.is_box(); });
      return visit(r);
    }
    const int n = pending.front();
    pending.erase(pending.begin());
    const SpaceNode& node = sp.nodes[n];
    if (node.edges.empty()) {
      cur.leaves.push_back(n);
      const bool more = go(pending);
      cur.leaves.pop_back();
      return more;
    }
    for (std::size_t k = 0; k < node.edges.size(); ++k) {
      cur.choices.emplace_back(n, static_cast<int>(k));
      std::vector<int> next = pending;
      next.insert(next.end(), node.edges[k].children.begin(), node.edges[k].children.end());
      const bool more = go(std::move(next));
      cur.choices.pop_back();
      if (!more) return false;
    }
    return true;
  };
  go({0});
}

Proof reduction_to_proof(const SearchSpace& sp, const Reduction& r) {
  std::map<int, int> choice(r.choices.begin(), r.choices.end());
  std::function<Proof(const Sequent&, int)> go = [&](const Sequent& raw, int n) -> Proof {
    if (sp.nodes[n].sequent.is_box()) return Proof{Sequent::box(), std::nullopt, {}};
    auto it = choice.find(n);
    if (it == choice.end()) return Proof{raw, std::nullopt, {}};
    const SpaceEdge& e = sp.nodes[n].edges[it->second];
    Proof p = realize(raw, e.alt);
    if (e.alt.premisses.empty()) return p;
    auto leaves = open_leaves(p);
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      const Sequent leaf = leaves[i]->sequent;
      *leaves[i] = go(leaf, e.children[i]);
    }
    return p;
  };
  return go(sp.root_raw, 0);
}

// ---------------------------------------------------------------- prover

namespace {

struct Outcome {
  std::shared_ptr<const MacroNode> proof;
  int min_hit = INT_MAX;  // shallowest ancestor level whose repetition pruned a branch
  bool depth_hit = false;
};

// Worker threads computing successor lists ahead of the prover, breadth-first from the root.
// Successor generation is pure, so sharing its results cannot change any verdict or proof.
class Prefetcher {
 public:
  Prefetcher(const Sequent& root, int depth, int workers, SuccessorFn succ) : succ_(std::move(succ)) {
    queue_.push_back({root, depth});
    queued_.insert(root.str());
    for (int i = 0; i < workers; ++i) threads_.emplace_back([this] { run(); });
  }
  ~Prefetcher() {
    {
      std::lock_guard<std::mutex> g(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }
  Prefetcher(const Prefetcher&) = delete;
  Prefetcher& operator=(const Prefetcher&) = delete;

  std::optional<std::vector<Alternative>> take(const std::string& key) {
    std::lock_guard<std::mutex> g(mu_);
    auto it = done_.find(key);
    if (it == done_.end()) return std::nullopt;
    return it->second;
  }

 private:
  static constexpr std::size_t kMaxEntries = 200000;

  void run() {
    for (;;) {
      std::pair<Sequent, int> job;
      {
        std::unique_lock<std::mutex> g(mu_);
        cv_.wait(g, [&] { return stop_ || !queue_.empty(); });
        if (stop_) return;
        job = std::move(queue_.front());
        queue_.pop_front();
      }
      std::vector<Alternative> alts;
      try {
        alts = succ_(job.first);
      } catch (const std::exception&) {
        continue;  // the prover recomputes and reports it
      }
      std::lock_guard<std::mutex> g(mu_);
      if (job.second > 1 && queued_.size() < kMaxEntries)
        for (const auto& a : alts)
          for (const auto& q : a.premisses)
            if (queued_.insert(q.str()).second) queue_.push_back({q, job.second - 1});
      done_.emplace(job.first.str(), std::move(alts));
      cv_.notify_all();
    }
  }

  SuccessorFn succ_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::pair<Sequent, int>> queue_;
  std::set<std::string> queued_;
  std::unordered_map<std::string, std::vector<Alternative>> done_;
  std::vector<std::thread> threads_;
  bool stop_ = false;
};

class Engine {
 public:
  Engine(const SearchPolicy& p, SuccessorFn succ, Prefetcher* pre = nullptr)
      : pol_(p), succ_(std::move(succ)), pre_(pre) {}

  Outcome solve(const Sequent& s, int d, int level) {
    const std::string key = s.str();
    if (auto it = success_.find(key); it != success_.end() && it->second->height <= d) return {it->second};
    if (auto it = fail_.find(key); it != fail_.end() && it->second.first >= d) {
      Outcome o;
      o.depth_hit = it->second.second;
      return o;
    }
    if (pol_.loop_check) {
      if (auto it = ancestors_.find(key); it != ancestors_.end()) {
        Outcome o;
        o.min_hit = it->second;
        return o;
      }
    }
    if (d == 0) {
      Outcome o;
      o.depth_hit = true;
      return o;
    }
    if (++expanded_ > pol_.node_cap) throw SearchBudgetExceeded("node cap of " + std::to_string(pol_.node_cap) + " exceeded");
    const std::vector<Alternative>& alts = successors(key, s);
    ancestors_.emplace(key, level);
    Outcome fail;
    for (const Alternative& a : alts) {
      std::vector<std::shared_ptr<const MacroNode>> kids;
      bool ok = true;
      int h = 0;
      for (const Sequent& p : a.premisses) {
        Outcome o = solve(p, d - 1, level + 1);
        if (!o.proof) {
          fail.min_hit = std::min(fail.min_hit, o.min_hit);
          fail.depth_hit = fail.depth_hit || o.depth_hit;
          ok = false;
          break;
        }
        h = std::max(h, o.proof->height);
        kids.push_back(std::move(o.proof));
      }
      if (ok) {
        ancestors_.erase(key);
        auto node = std::make_shared<MacroNode>(MacroNode{s, a, std::move(kids), h + 1});
        auto& slot = success_[key];
        if (!slot || slot->height > node->height) slot = node;
        return {node};
      }
    }
    ancestors_.erase(key);
    if (fail.min_hit >= level) {
      auto& f = fail_[key];
      if (f.first < d) f = {d, fail.depth_hit};
    }
    return fail;
  }

  std::size_t expanded() const { return expanded_; }

 private:
  const std::vector<Alternative>& successors(const std::string& key, const Sequent& s) {
    auto it = succ_cache_.find(key);
    if (it != succ_cache_.end()) return it->second;
    std::optional<std::vector<Alternative>> pre;
    if (pre_) pre = pre_->take(key);
    std::vector<Alternative> alts = pre ? std::move(*pre) : succ_ ? succ_(s) : alternatives(s, pol_);
    if (pol_.invertible_first) {
      auto closing = std::find_if(alts.begin(), alts.end(), [](const Alternative& a) { return a.premisses.empty(); });
      if (closing != alts.end()) {
        alts = {*closing};
      } else {
        auto inv = std::find_if(alts.begin(), alts.end(), [](const Alternative& a) { return is_invertible(a.rule); });
        if (inv != alts.end()) alts = {*inv};
      }
    }
    return succ_cache_.emplace(key, std::move(alts)).first->second;
  }

  const SearchPolicy& pol_;
  SuccessorFn succ_;
  Prefetcher* pre_;
  std::unordered_map<std::string, std::vector<Alternative>> succ_cache_;
  std::unordered_map<std::string, std::shared_ptr<const MacroNode>> success_;
  std::unordered_map<std::string, std::pair<int, bool>> fail_;
  std::unordered_map<std::string, int> ancestors_;
  std::size_t expanded_ = 0;
};

}  // namespace

MacroResult search(const Sequent& s0, const SearchPolicy& policy, const SuccessorFn& succ) {
  MacroResult res;
  if (s0.is_box()) {
    res.reason = Unproven::None;
    return res;
  }
  const Sequent s = normalize(s0);
  std::unique_ptr<Prefetcher> pre;
  if (policy.jobs > 1) {
    SuccessorFn base = succ ? succ : SuccessorFn([&policy](const Sequent& q) { return alternatives(q, policy); });
    pre = std::make_unique<Prefetcher>(s, policy.depth, policy.jobs - 1, std::move(base));
  }
  Engine e(policy, succ, pre.get());
  for (int d = 1; d <= policy.depth; ++d) {
    Outcome o = e.solve(s, d, 0);
    res.depth = d;
    res.expanded = e.expanded();
    if (o.proof) {
      res.proof = o.proof;
      return res;
    }
    if (!o.depth_hit) {
      res.reason = Unproven::ExhaustedSpace;
      return res;
    }
  }
  res.reason = Unproven::DepthExhausted;
  return res;
}

ProveResult prove(const Sequent& s, const SearchPolicy& policy) {
  ProveResult out;
  if (s.is_box()) {
    out.proof = Proof{Sequent::box(), std::nullopt, {}};
    return out;
  }
  MacroResult m = search(s, policy);
  out.reason = m.reason;
  out.depth = m.depth;
  out.expanded = m.expanded;
  out.macro = m.proof;
  if (m.proof) out.proof = materialize(s, *m.proof);
  return out;
}

}  // namespace bi
