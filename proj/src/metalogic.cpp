#include "bi/metalogic.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <stdexcept>

namespace bi {

bool is_world_constant(const std::string& w) { return w == "e" || w == "pi"; }
bool is_formula_var(const std::string& name) { return !name.empty() && name[0] == '$'; }

namespace {

bool is_world_name(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'')) return false;
  return s != "forall" && s != "exists" && s != "sat" && s != "R";
}

std::shared_ptr<MNode> mk(MK k) {
  auto n = std::make_shared<MNode>();
  n->kind = k;
  return n;
}

}  // namespace

// ---------------------------------------------------------------- construction

MetaFormula MetaFormula::sat(std::string w, Formula f) {
  auto n = mk(MK::Sat);
  n->worlds = {std::move(w)};
  n->f = std::move(f);
  return MetaFormula(std::move(n));
}
MetaFormula MetaFormula::rel(std::string x, std::string y, std::string z) {
  auto n = mk(MK::Rel);
  n->worlds = {std::move(x), std::move(y), std::move(z)};
  return MetaFormula(std::move(n));
}
MetaFormula MetaFormula::leq(std::string x, std::string y) {
  auto n = mk(MK::Leq);
  n->worlds = {std::move(x), std::move(y)};
  return MetaFormula(std::move(n));
}
MetaFormula MetaFormula::eq(std::string x, std::string y) {
  auto n = mk(MK::Eq);
  n->worlds = {std::move(x), std::move(y)};
  return MetaFormula(std::move(n));
}

MetaFormula MetaFormula::conj(MetaFormula a, MetaFormula b) {
  auto n = mk(MK::And);
  n->a = std::move(a);
  n->b = std::move(b);
  return MetaFormula(std::move(n));
}
MetaFormula MetaFormula::disj(MetaFormula a, MetaFormula b) {
  auto n = mk(MK::Or);
  n->a = std::move(a);
  n->b = std::move(b);
  return MetaFormula(std::move(n));
}
MetaFormula MetaFormula::imp(MetaFormula a, MetaFormula b) {
  auto n = mk(MK::Imp);
  n->a = std::move(a);
  n->b = std::move(b);
  return MetaFormula(std::move(n));
}

namespace {
std::shared_ptr<MNode> quant(MK k, std::string v, MetaFormula body) {
  auto n = mk(k);
  n->var = std::move(v);
  n->a = std::move(body);
  return n;
}
}  // namespace

MetaFormula MetaFormula::forall_w(std::string v, MetaFormula body) {
  return MetaFormula(quant(MK::ForallW, std::move(v), std::move(body)));
}
MetaFormula MetaFormula::exists_w(std::string v, MetaFormula body) {
  return MetaFormula(quant(MK::ExistsW, std::move(v), std::move(body)));
}
MetaFormula MetaFormula::forall_f(std::string v, MetaFormula body) {
  return MetaFormula(quant(MK::ForallF, std::move(v), std::move(body)));
}
MetaFormula MetaFormula::exists_f(std::string v, MetaFormula body) {
  return MetaFormula(quant(MK::ExistsF, std::move(v), std::move(body)));
}
MetaFormula MetaFormula::verum() { return MetaFormula(mk(MK::Verum)); }
MetaFormula MetaFormula::falsum() { return MetaFormula(mk(MK::Falsum)); }

MK MetaFormula::kind() const { return n_->kind; }
bool MetaFormula::is_quantifier() const {
  MK k = kind();
  return k == MK::ForallW || k == MK::ExistsW || k == MK::ForallF || k == MK::ExistsF;
}
const std::vector<std::string>& MetaFormula::worlds() const { return n_->worlds; }
const Formula& MetaFormula::formula() const {
  if (!n_->f) throw std::logic_error("formula() on non-sat meta formula");
  return *n_->f;
}
const std::string& MetaFormula::var() const { return n_->var; }
const MetaFormula& MetaFormula::left() const {
  if (!n_->a) throw std::logic_error("left() on meta formula without children");
  return *n_->a;
}
const MetaFormula& MetaFormula::right() const {
  if (!n_->b) throw std::logic_error("right() on non-binary meta formula");
  return *n_->b;
}
const MetaFormula& MetaFormula::body() const { return left(); }

bool operator==(const MetaFormula& a, const MetaFormula& b) {
  if (a.n_ == b.n_) return true;
  if (a.kind() != b.kind() || a.n_->worlds != b.n_->worlds || a.n_->var != b.n_->var) return false;
  if (a.n_->f.has_value() != b.n_->f.has_value() || (a.n_->f && !(*a.n_->f == *b.n_->f))) return false;
  if (a.n_->a.has_value() != b.n_->a.has_value() || (a.n_->a && !(*a.n_->a == *b.n_->a))) return false;
  if (a.n_->b.has_value() != b.n_->b.has_value() || (a.n_->b && !(*a.n_->b == *b.n_->b))) return false;
  return true;
}

// ---------------------------------------------------------------- printing

namespace {

// Precedence: quantifiers 0, => 1 (right), | 2 (left), & 3 (left), atoms 4.
void print(const MetaFormula& f, int ctx, std::string& out) {
  auto wrap = [&](int prec, auto&& body) {
    if (prec < ctx) out += '(';
    body();
    if (prec < ctx) out += ')';
  };
  const auto& w = f.worlds();
  switch (f.kind()) {
    case MK::Sat: out += "sat(" + w[0] + ", " + f.formula().str() + ")"; return;
    case MK::Rel: out += "R(" + w[0] + ", " + w[1] + ", " + w[2] + ")"; return;
    case MK::Leq: out += w[0] + " <= " + w[1]; return;
    case MK::Eq: out += w[0] + " = " + w[1]; return;
    case MK::Verum: out += "[]"; return;
    case MK::Falsum: out += "#"; return;
    case MK::And:
      wrap(3, [&] { print(f.left(), 3, out); out += " & "; print(f.right(), 4, out); });
      return;
    case MK::Or:
      wrap(2, [&] { print(f.left(), 2, out); out += " | "; print(f.right(), 3, out); });
      return;
    case MK::Imp:
      wrap(1, [&] { print(f.left(), 2, out); out += " => "; print(f.right(), 1, out); });
      return;
    case MK::ForallW: case MK::ForallF: case MK::ExistsW: case MK::ExistsF:
      wrap(0, [&] {
        bool all = f.is(MK::ForallW) || f.is(MK::ForallF);
        out += all ? "forall " : "exists ";
        out += f.var() + ". ";
        print(f.body(), 0, out);
      });
      return;
  }
}

}  // namespace

std::string MetaFormula::str() const {
  std::string s;
  print(*this, 0, s);
  return s;
}

// ---------------------------------------------------------------- parsing

namespace {

class MetaParser {
 public:
  explicit MetaParser(const std::string& s) : s_(s) {}

  MetaFormula whole() {
    MetaFormula f = meta();
    ws();
    if (i_ != s_.size()) fail("unexpected input");
    return f;
  }

  Formula whole_term() {
    Formula f = term(1);
    ws();
    if (i_ != s_.size()) fail("unexpected input after formula term");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& m) const {
    throw ParseError(m, 1, static_cast<int>(i_) + 1);
  }
  void ws() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool peek(const char* lit) {
    ws();
    return s_.compare(i_, std::char_traits<char>::length(lit), lit) == 0;
  }
  bool eat(const char* lit) {
    if (!peek(lit)) return false;
    i_ += std::char_traits<char>::length(lit);
    return true;
  }
  void expect(const char* lit) {
    if (!eat(lit)) fail(std::string("expected '") + lit + "'");
  }
  std::string ident() {
    ws();
    std::size_t j = i_;
    if (j < s_.size() && s_[j] == '$') ++j;
    std::size_t k = j;
    while (k < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[k])) || s_[k] == '_' || s_[k] == '\'')) ++k;
    if (k == j) fail("expected identifier");
    std::string id = s_.substr(i_, k - i_);
    i_ = k;
    return id;
  }
  bool peek_word(const char* w) {
    ws();
    std::size_t n = std::char_traits<char>::length(w);
    if (s_.compare(i_, n, w) != 0) return false;
    std::size_t k = i_ + n;
    return k >= s_.size() || !(std::isalnum(static_cast<unsigned char>(s_[k])) || s_[k] == '_' || s_[k] == '\'');
  }
  std::string world() {
    std::string w = ident();
    if (!is_world_name(w)) fail("bad world name '" + w + "'");
    return w;
  }

  MetaFormula meta() {
    if (peek_word("forall") || peek_word("exists")) return quantified();
    MetaFormula l = disj();
    if (eat("=>")) return MetaFormula::imp(l, meta());
    return l;
  }
  MetaFormula quantified() {
    bool all = peek_word("forall");
    i_ += 6;  // "forall" and "exists"
    std::string v = ident();
    bool fsort = is_formula_var(v);
    if (!fsort && !is_world_name(v)) fail("bad bound variable '" + v + "'");
    if (!fsort && is_world_constant(v)) fail("cannot bind a world constant");
    expect(".");
    MetaFormula b = meta();
    if (fsort) return all ? MetaFormula::forall_f(v, b) : MetaFormula::exists_f(v, b);
    return all ? MetaFormula::forall_w(v, b) : MetaFormula::exists_w(v, b);
  }
  MetaFormula disj() {
    MetaFormula l = conj();
    while (!peek("||") && eat("|")) l = MetaFormula::disj(l, conj());
    return l;
  }
  MetaFormula conj() {
    MetaFormula l = prim();
    while (eat("&")) l = MetaFormula::conj(l, prim());
    return l;
  }
  MetaFormula prim() {
    ws();
    if (peek_word("forall") || peek_word("exists")) return quantified();
    if (eat("(")) {
      MetaFormula f = meta();
      expect(")");
      return f;
    }
    if (eat("[]")) return MetaFormula::verum();
    if (eat("#")) return MetaFormula::falsum();
    if (peek_word("sat")) {
      i_ += 3;
      expect("(");
      std::string w = world();
      expect(",");
      Formula f = term(1);
      expect(")");
      return MetaFormula::sat(w, f);
    }
    if (peek_word("R")) {
      i_ += 1;
      expect("(");
      std::string x = world();
      expect(",");
      std::string y = world();
      expect(",");
      std::string z = world();
      expect(")");
      return MetaFormula::rel(x, y, z);
    }
    std::string x = world();
    if (eat("<=")) return MetaFormula::leq(x, world());
    if (peek("=>")) fail("expected '=' or '<='");
    if (eat("=")) return MetaFormula::eq(x, world());
    fail("expected '=' or '<=' after world '" + x + "'");
  }

  // BI formula terms; same precedence as the object grammar, plus "$x" variables.
  Formula term(int level) {
    if (level == 1) {
      Formula l = term(2);
      if (eat("->")) return Formula::imp(l, term(1));
      if (eat("-*")) return Formula::wand(l, term(1));
      return l;
    }
    if (level == 2) {
      Formula l = term(3);
      while (eat("\\/")) l = Formula::disj(l, term(3));
      return l;
    }
    Formula l = term_prim();
    for (;;) {
      if (eat("/\\")) l = Formula::conj(l, term_prim());
      else if (eat("*")) l = Formula::star(l, term_prim());
      else return l;
    }
  }
  Formula term_prim() {
    ws();
    if (eat("(")) {
      Formula f = term(1);
      expect(")");
      return f;
    }
    if (i_ < s_.size() && s_[i_] == '$') return Formula::atom(ident());
    if (peek_word("T")) { ++i_; return Formula::top(); }
    if (peek_word("F")) { ++i_; return Formula::bottom(); }
    if (peek_word("I")) { ++i_; return Formula::mtop(); }
    if (i_ < s_.size() && std::islower(static_cast<unsigned char>(s_[i_]))) {
      std::size_t k = i_;
      while (k < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[k])) || s_[k] == '_')) ++k;
      std::string a = s_.substr(i_, k - i_);
      i_ = k;
      return Formula::atom(a);
    }
    fail("expected formula term");
  }

  const std::string& s_;
  std::size_t i_ = 0;
};

Formula parse_term(const std::string& text) { return MetaParser(text).whole_term(); }

}  // namespace

MetaFormula parse_meta(const std::string& text) { return MetaParser(text).whole(); }

// ---------------------------------------------------------------- variables and substitution

namespace {

void fv_formula(const Formula& f, std::set<std::string>& out) {
  if (f.is(FKind::Atom)) {
    if (is_formula_var(f.name())) out.insert(f.name());
  } else if (f.is_binary()) {
    fv_formula(f.left(), out);
    fv_formula(f.right(), out);
  }
}

void fw(const MetaFormula& f, std::set<std::string>& out, std::set<std::string>& bound) {
  switch (f.kind()) {
    case MK::Sat: case MK::Rel: case MK::Leq: case MK::Eq:
      for (const auto& w : f.worlds())
        if (!is_world_constant(w) && !bound.count(w)) out.insert(w);
      return;
    case MK::Verum: case MK::Falsum: return;
    case MK::And: case MK::Or: case MK::Imp:
      fw(f.left(), out, bound);
      fw(f.right(), out, bound);
      return;
    case MK::ForallW: case MK::ExistsW: {
      bool fresh = bound.insert(f.var()).second;
      fw(f.body(), out, bound);
      if (fresh) bound.erase(f.var());
      return;
    }
    case MK::ForallF: case MK::ExistsF: fw(f.body(), out, bound); return;
  }
}

void ff(const MetaFormula& f, std::set<std::string>& out, std::set<std::string>& bound) {
  switch (f.kind()) {
    case MK::Sat: {
      std::set<std::string> here;
      fv_formula(f.formula(), here);
      for (const auto& v : here)
        if (!bound.count(v)) out.insert(v);
      return;
    }
    case MK::Rel: case MK::Leq: case MK::Eq: case MK::Verum: case MK::Falsum: return;
    case MK::And: case MK::Or: case MK::Imp:
      ff(f.left(), out, bound);
      ff(f.right(), out, bound);
      return;
    case MK::ForallF: case MK::ExistsF: {
      bool fresh = bound.insert(f.var()).second;
      ff(f.body(), out, bound);
      if (fresh) bound.erase(f.var());
      return;
    }
    case MK::ForallW: case MK::ExistsW: ff(f.body(), out, bound); return;
  }
}

MetaFormula rebuild_q(const MetaFormula& q, std::string v, MetaFormula body) {
  switch (q.kind()) {
    case MK::ForallW: return MetaFormula::forall_w(std::move(v), std::move(body));
    case MK::ExistsW: return MetaFormula::exists_w(std::move(v), std::move(body));
    case MK::ForallF: return MetaFormula::forall_f(std::move(v), std::move(body));
    default: return MetaFormula::exists_f(std::move(v), std::move(body));
  }
}

MetaFormula rebuild_bin(const MetaFormula& f, MetaFormula a, MetaFormula b) {
  switch (f.kind()) {
    case MK::And: return MetaFormula::conj(std::move(a), std::move(b));
    case MK::Or: return MetaFormula::disj(std::move(a), std::move(b));
    default: return MetaFormula::imp(std::move(a), std::move(b));
  }
}

std::string prime_away(std::string v, const std::set<std::string>& avoid) {
  while (avoid.count(v)) v += '\'';
  return v;
}

Formula subst_in_formula(const Formula& f, const std::string& x, const Formula& t) {
  if (f.is(FKind::Atom)) return f.name() == x ? t : f;
  if (!f.is_binary()) return f;
  return Formula::binary(f.kind(), subst_in_formula(f.left(), x, t), subst_in_formula(f.right(), x, t));
}

}  // namespace

std::set<std::string> free_worlds(const MetaFormula& f) {
  std::set<std::string> out, bound;
  fw(f, out, bound);
  return out;
}

std::set<std::string> free_fvars(const MetaFormula& f) {
  std::set<std::string> out, bound;
  ff(f, out, bound);
  return out;
}

MetaFormula subst_world(const MetaFormula& f, const std::string& x, const std::string& t) {
  auto sw = [&](const std::string& w) { return w == x ? t : w; };
  const auto& w = f.worlds();
  switch (f.kind()) {
    case MK::Sat: return MetaFormula::sat(sw(w[0]), f.formula());
    case MK::Rel: return MetaFormula::rel(sw(w[0]), sw(w[1]), sw(w[2]));
    case MK::Leq: return MetaFormula::leq(sw(w[0]), sw(w[1]));
    case MK::Eq: return MetaFormula::eq(sw(w[0]), sw(w[1]));
    case MK::Verum: case MK::Falsum: return f;
    case MK::And: case MK::Or: case MK::Imp:
      return rebuild_bin(f, subst_world(f.left(), x, t), subst_world(f.right(), x, t));
    case MK::ForallW: case MK::ExistsW: {
      if (f.var() == x) return f;
      auto body_fv = free_worlds(f.body());
      if (!body_fv.count(x)) return f;
      if (f.var() != t) return rebuild_q(f, f.var(), subst_world(f.body(), x, t));
      std::set<std::string> avoid = body_fv;
      avoid.insert(t);
      avoid.insert(x);
      std::string v2 = prime_away(f.var(), avoid);
      return rebuild_q(f, v2, subst_world(subst_world(f.body(), f.var(), v2), x, t));
    }
    case MK::ForallF: case MK::ExistsF: return rebuild_q(f, f.var(), subst_world(f.body(), x, t));
  }
  return f;
}

MetaFormula subst_formula(const MetaFormula& f, const std::string& x, const Formula& t) {
  switch (f.kind()) {
    case MK::Sat: return MetaFormula::sat(f.worlds()[0], subst_in_formula(f.formula(), x, t));
    case MK::Rel: case MK::Leq: case MK::Eq: case MK::Verum: case MK::Falsum: return f;
    case MK::And: case MK::Or: case MK::Imp:
      return rebuild_bin(f, subst_formula(f.left(), x, t), subst_formula(f.right(), x, t));
    case MK::ForallF: case MK::ExistsF: {
      if (f.var() == x) return f;
      auto body_fv = free_fvars(f.body());
      if (!body_fv.count(x)) return f;
      std::set<std::string> tv;
      fv_formula(t, tv);
      if (!tv.count(f.var())) return rebuild_q(f, f.var(), subst_formula(f.body(), x, t));
      std::set<std::string> avoid = body_fv;
      avoid.insert(tv.begin(), tv.end());
      avoid.insert(x);
      std::string v2 = prime_away(f.var(), avoid);
      return rebuild_q(f, v2, subst_formula(subst_formula(f.body(), f.var(), Formula::atom(v2)), x, t));
    }
    case MK::ForallW: case MK::ExistsW: return rebuild_q(f, f.var(), subst_formula(f.body(), x, t));
  }
  return f;
}

MetaFormula instantiate(const MetaFormula& q, const std::string& term) {
  if (q.is(MK::ForallW) || q.is(MK::ExistsW)) {
    if (!is_world_name(term)) throw std::invalid_argument("bad world term '" + term + "'");
    return subst_world(q.body(), q.var(), term);
  }
  if (q.is(MK::ForallF) || q.is(MK::ExistsF)) return subst_formula(q.body(), q.var(), parse_term(term));
  throw std::invalid_argument("instantiate: not a quantifier: " + q.str());
}

// ---------------------------------------------------------------- sequents

std::string MetaSequent::str() const {
  std::string s;
  for (std::size_t i = 0; i < ctx.size(); ++i) s += (i ? ", " : "") + ctx[i].str();
  s += ctx.empty() ? ": " : " : ";
  for (std::size_t i = 0; i < ext.size(); ++i) s += (i ? ", " : "") + ext[i].str();
  return s;
}

std::set<std::string> MetaSequent::free_worlds() const {
  std::set<std::string> out;
  for (const auto* side : {&ctx, &ext})
    for (const auto& f : *side) {
      auto s = bi::free_worlds(f);
      out.insert(s.begin(), s.end());
    }
  return out;
}

namespace {

std::set<std::string> seq_fvars(const MetaSequent& s) {
  std::set<std::string> out;
  for (const auto* side : {&s.ctx, &s.ext})
    for (const auto& f : *side) {
      auto v = free_fvars(f);
      out.insert(v.begin(), v.end());
    }
  return out;
}

// Multiset key; □ carries no information in a context.
std::vector<std::string> key(const std::vector<MetaFormula>& v, bool drop_verum) {
  std::vector<std::string> k;
  for (const auto& f : v)
    if (!(drop_verum && f.is(MK::Verum))) k.push_back(f.str());
  std::sort(k.begin(), k.end());
  return k;
}

}  // namespace

bool same_multiset(const MetaSequent& a, const MetaSequent& b) {
  return key(a.ctx, true) == key(b.ctx, true) && key(a.ext, false) == key(b.ext, false);
}

// ---------------------------------------------------------------- theories

const MetaFormula* Theory::find(const std::string& n) const {
  for (const auto& [name, f] : sentences)
    if (name == n) return &f;
  return nullptr;
}

namespace {

Theory make_sigma() {
  Theory t{"sigma_bi", {}};
  auto add = [&](const char* n, const char* text) { t.sentences.emplace_back(n, parse_meta(text)); };
  // Frame and persistence laws.
  add("unitality", "forall x. R(x, x, e)");
  add("commutativity", "forall x. forall y. forall z. (R(x, y, z) => R(x, z, y)) & (R(x, z, y) => R(x, y, z))");
  add("persistence", "forall x. forall y. forall $a. x <= y => (sat(x, $a) => sat(y, $a))");
  add("associativity",
      "forall x. forall a. forall y. forall b. forall c. R(x, a, y) & R(y, b, c) => "
      "(exists t. R(x, t, c) & R(t, a, b))");
  add("absurdity", "forall x. forall $a. x = pi => sat(x, $a)");
  // Satisfaction clauses, one sentence per direction.
  add("top_r", "forall x. [] => sat(x, T)");
  add("bot_l", "forall x. sat(x, F) => x = pi");
  add("and_l", "forall x. forall $a. forall $b. sat(x, $a /\\ $b) => sat(x, $a) & sat(x, $b)");
  add("and_r", "forall x. forall $a. forall $b. sat(x, $a) & sat(x, $b) => sat(x, $a /\\ $b)");
  add("or_l", "forall x. forall $a. forall $b. sat(x, $a \\/ $b) => sat(x, $a) | sat(x, $b)");
  add("or_r", "forall x. forall $a. forall $b. sat(x, $a) | sat(x, $b) => sat(x, $a \\/ $b)");
  add("imp_l", "forall x. forall $a. forall $b. sat(x, $a -> $b) => (forall u. x <= u => (sat(u, $a) => sat(u, $b)))");
  add("imp_r", "forall x. forall $a. forall $b. (forall u. x <= u => (sat(u, $a) => sat(u, $b))) => sat(x, $a -> $b)");
  add("star_l",
      "forall x. forall $a. forall $b. sat(x, $a * $b) => (exists u. exists v. R(x, u, v) & (sat(u, $a) & sat(v, $b)))");
  add("star_r",
      "forall x. forall $a. forall $b. (exists u. exists v. R(x, u, v) & (sat(u, $a) & sat(v, $b))) => sat(x, $a * $b)");
  add("wand_l",
      "forall x. forall $a. forall $b. sat(x, $a -* $b) => (forall u. forall y. R(y, x, u) => (sat(u, $a) => sat(y, $b)))");
  add("wand_r",
      "forall x. forall $a. forall $b. (forall u. forall y. R(y, x, u) => (sat(u, $a) => sat(y, $b))) => sat(x, $a -* $b)");
  return t;
}

Theory make_cert() {
  Theory t = make_sigma();
  t.name = "certification";
  auto add = [&](const char* n, const char* text) { t.sentences.emplace_back(n, parse_meta(text)); };
  add("refl", "forall x. x <= x");
  add("mtop_l", "forall x. sat(x, I) => e <= x");
  add("mtop_r", "forall x. e <= x => sat(x, I)");
  add("unit_mono", "forall x. forall y. forall z. R(x, y, z) & e <= z => y <= x");
  add("pi_absorb", "forall x. forall y. forall z. R(x, y, z) & y = pi => x = pi");
  return t;
}

}  // namespace

const Theory& sigma_bi() {
  static const Theory t = make_sigma();
  return t;
}

const Theory& certification_theory() {
  static const Theory t = make_cert();
  return t;
}

const Theory* theory_by_name(const std::string& n) {
  if (n == "sigma_bi") return &sigma_bi();
  if (n == "certification") return &certification_theory();
  return nullptr;
}

MetaSequent embed(const Sequent& s, const std::string& w) {
  if (s.is_box()) throw std::invalid_argument("embed: cannot embed the empty sequent");
  return MetaSequent{{MetaFormula::sat(w, compact(s.ctx()))}, {MetaFormula::sat(w, s.goal())}};
}

// ---------------------------------------------------------------- derivations

std::size_t MetaDerivation::size() const {
  std::size_t n = 1;
  for (const auto& k : kids) n += k.size();
  return n;
}

std::vector<const MetaDerivation*> MetaDerivation::hyps() const {
  std::vector<const MetaDerivation*> out;
  std::function<void(const MetaDerivation&)> go = [&](const MetaDerivation& d) {
    if (d.rule == "hyp") out.push_back(&d);
    for (const auto& k : d.kids) go(k);
  };
  go(*this);
  return out;
}

namespace {

using V = std::vector<MetaFormula>;

V erase(V v, int i) {
  v.erase(v.begin() + i);
  return v;
}
V plus(V v, std::initializer_list<MetaFormula> xs) {
  v.insert(v.end(), xs.begin(), xs.end());
  return v;
}

struct Checker {
  const DljOptions& opt;
  const Theory& th;
  std::vector<int> path;

  DljCheck bad(const MetaDerivation& d, const std::string& m) const {
    return DljCheck{false, path, d.rule + ": " + m};
  }

  DljCheck expect(const MetaDerivation& d, const std::vector<MetaSequent>& prem) {
    if (d.kids.size() != prem.size())
      return bad(d, "expected " + std::to_string(prem.size()) + " premisses, found " + std::to_string(d.kids.size()));
    for (std::size_t k = 0; k < prem.size(); ++k)
      if (!same_multiset(d.kids[k].seq, prem[k]))
        return bad(d, "premiss " + std::to_string(k) + " should be " + prem[k].str() + ", found " + d.kids[k].seq.str());
    for (std::size_t k = 0; k < prem.size(); ++k) {
      path.push_back(static_cast<int>(k));
      DljCheck c = run(d.kids[k]);
      path.pop_back();
      if (!c) return c;
    }
    return {};
  }

  bool fresh_eigen(const MetaDerivation& d, const MetaFormula& q, std::string& why) const {
    const std::string& y = d.eigen;
    if (q.is(MK::ForallW) || q.is(MK::ExistsW)) {
      if (!is_world_name(y) || is_world_constant(y)) { why = "bad eigenvariable '" + y + "'"; return false; }
      if (d.seq.free_worlds().count(y)) { why = "eigenvariable " + y + " occurs free in the conclusion"; return false; }
      return true;
    }
    if (!is_formula_var(y) || y.size() < 2) { why = "bad formula eigenvariable '" + y + "'"; return false; }
    if (seq_fvars(d.seq).count(y)) { why = "eigenvariable " + y + " occurs free in the conclusion"; return false; }
    return true;
  }

  DljCheck run(const MetaDerivation& d) {
    const V& C = d.seq.ctx;
    const V& E = d.seq.ext;
    const int i = d.principal;
    const std::string& r = d.rule;
    auto in_c = [&] { return i >= 0 && i < static_cast<int>(C.size()); };
    auto in_e = [&] { return i >= 0 && i < static_cast<int>(E.size()); };
    auto seq = [](V c, V e) { return MetaSequent{std::move(c), std::move(e)}; };

    if (r == "hyp") {
      if (!opt.allow_hyp) return bad(d, "open premiss");
      if (!d.kids.empty()) return bad(d, "hyp has premisses");
      return {};
    }
    if (r == "id") {
      if (!d.kids.empty()) return bad(d, "axiom has premisses");
      auto kc = key(C, true);
      if (kc.size() != 1 || E.size() != 1 || kc[0] != E[0].str()) return bad(d, "not of the form A : A");
      return {};
    }
    if (r == "verumR") {
      if (!d.kids.empty()) return bad(d, "axiom has premisses");
      if (E.size() != 1 || !E[0].is(MK::Verum)) return bad(d, "extract is not []");
      return {};
    }
    if (r == "falsumL") {
      if (!d.kids.empty()) return bad(d, "axiom has premisses");
      if (!in_c() || !C[i].is(MK::Falsum)) return bad(d, "principal is not #");
      return {};
    }
    if (r == "wL" || r == "cL") {
      if (!in_c()) return bad(d, "principal out of range");
      return expect(d, {seq(r == "wL" ? erase(C, i) : plus(C, {C[i]}), E)});
    }
    if (r == "wR" || r == "cR") {
      if (!in_e()) return bad(d, "principal out of range");
      return expect(d, {seq(C, r == "wR" ? erase(E, i) : plus(E, {E[i]}))});
    }
    if (r == "eL" || r == "eR") {
      bool left = r == "eL";
      int n = static_cast<int>(left ? C.size() : E.size());
      if (i < 0 || i + 1 >= n) return bad(d, "exchange position out of range");
      V v = left ? C : E;
      std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(i) + 1]);
      return expect(d, {left ? seq(v, E) : seq(C, v)});
    }
    if (r == "andL") {
      if (!in_c() || !C[i].is(MK::And)) return bad(d, "principal is not a conjunction");
      return expect(d, {seq(plus(erase(C, i), {C[i].left(), C[i].right()}), E)});
    }
    if (r == "andR") {
      if (!in_e() || !E[i].is(MK::And)) return bad(d, "principal is not a conjunction");
      return expect(d, {seq(C, plus(erase(E, i), {E[i].left()})), seq(C, plus(erase(E, i), {E[i].right()}))});
    }
    if (r == "orL") {
      if (!in_c() || !C[i].is(MK::Or)) return bad(d, "principal is not a disjunction");
      return expect(d, {seq(plus(erase(C, i), {C[i].left()}), E), seq(plus(erase(C, i), {C[i].right()}), E)});
    }
    if (r == "orR") {
      if (!in_e() || !E[i].is(MK::Or)) return bad(d, "principal is not a disjunction");
      return expect(d, {seq(C, plus(erase(E, i), {E[i].left(), E[i].right()}))});
    }
    if (r == "impL") {
      if (!in_c() || !C[i].is(MK::Imp)) return bad(d, "principal is not an implication");
      return expect(d, {seq(erase(C, i), plus(E, {C[i].left()})), seq(plus(erase(C, i), {C[i].right()}), E)});
    }
    if (r == "impR" || r == "impK") {
      if (r == "impK" && !opt.classical) return bad(d, "classical rule");
      if (r == "impR" && E.size() != 1) return bad(d, "needs a single extract");
      int k = r == "impR" ? 0 : i;
      if (k < 0 || k >= static_cast<int>(E.size()) || !E[k].is(MK::Imp)) return bad(d, "principal is not an implication");
      return expect(d, {seq(plus(C, {E[k].left()}), plus(erase(E, k), {E[k].right()}))});
    }
    if (r == "allL") {
      const MetaFormula* q = nullptr;
      V rest = C;
      if (!d.axiom.empty()) {
        q = th.find(d.axiom);
        if (!q) return bad(d, "unknown theory sentence '" + d.axiom + "'");
      } else {
        if (!in_c()) return bad(d, "principal out of range");
        q = &C[i];
        rest = erase(C, i);
      }
      if (!q->is(MK::ForallW) && !q->is(MK::ForallF)) return bad(d, "principal is not universal");
      MetaFormula inst = MetaFormula::verum();
      try {
        inst = instantiate(*q, d.term);
      } catch (const std::exception& ex) {
        return bad(d, std::string("bad term: ") + ex.what());
      }
      return expect(d, {seq(plus(rest, {inst}), E)});
    }
    if (r == "exR") {
      if (!in_e() || !(E[i].is(MK::ExistsW) || E[i].is(MK::ExistsF))) return bad(d, "principal is not existential");
      MetaFormula inst = MetaFormula::verum();
      try {
        inst = instantiate(E[i], d.term);
      } catch (const std::exception& ex) {
        return bad(d, std::string("bad term: ") + ex.what());
      }
      return expect(d, {seq(C, plus(erase(E, i), {inst}))});
    }
    if (r == "allR" || r == "allK") {
      if (r == "allK" && !opt.classical) return bad(d, "classical rule");
      if (r == "allR" && E.size() != 1) return bad(d, "needs a single extract");
      int k = r == "allR" ? 0 : i;
      if (k < 0 || k >= static_cast<int>(E.size()) || !(E[k].is(MK::ForallW) || E[k].is(MK::ForallF)))
        return bad(d, "principal is not universal");
      std::string why;
      if (!fresh_eigen(d, E[k], why)) return bad(d, why);
      return expect(d, {seq(C, plus(erase(E, k), {instantiate(E[k], d.eigen)}))});
    }
    if (r == "exL") {
      if (!in_c() || !(C[i].is(MK::ExistsW) || C[i].is(MK::ExistsF))) return bad(d, "principal is not existential");
      std::string why;
      if (!fresh_eigen(d, C[i], why)) return bad(d, why);
      return expect(d, {seq(plus(erase(C, i), {instantiate(C[i], d.eigen)}), E)});
    }
    return bad(d, "unknown rule");
  }
};

}  // namespace

DljCheck check_dlj(const MetaDerivation& d, const DljOptions& opt) {
  Checker c{opt, opt.theory ? *opt.theory : sigma_bi(), {}};
  try {
    return c.run(d);
  } catch (const std::exception& ex) {
    return DljCheck{false, c.path, std::string("malformed derivation: ") + ex.what()};
  }
}

bool world_conservative(const MetaDerivation& d) {
  if (d.rule == "allL" || d.rule == "exR") {
    const MetaFormula* q = nullptr;
    if (!d.axiom.empty()) {
      q = certification_theory().find(d.axiom);
    } else if (d.principal >= 0) {
      const V& side = d.rule == "allL" ? d.seq.ctx : d.seq.ext;
      if (d.principal < static_cast<int>(side.size())) q = &side[static_cast<std::size_t>(d.principal)];
    }
    if (q && (q->is(MK::ForallW) || q->is(MK::ExistsW)) && !is_world_constant(d.term) &&
        !d.seq.free_worlds().count(d.term))
      return false;
  }
  for (const auto& k : d.kids)
    if (!world_conservative(k)) return false;
  return true;
}

bool world_independent(const MetaSequent& a, const MetaSequent& b) {
  auto x = a.free_worlds();
  for (const auto& w : b.free_worlds())
    if (x.count(w)) return false;
  return true;
}

void plug(MetaDerivation& d, const std::vector<MetaDerivation>& subs) {
  if (d.rule == "hyp") {
    for (const auto& s : subs)
      if (same_multiset(s.seq, d.seq)) {
        MetaSequent keep = d.seq;
        d = s;
        d.seq = std::move(keep);
        return;
      }
    return;
  }
  for (auto& k : d.kids) plug(k, subs);
}

nlohmann::json derivation_to_json(const MetaDerivation& d) {
  nlohmann::json j;
  nlohmann::json ctx = nlohmann::json::array(), ext = nlohmann::json::array();
  for (const auto& f : d.seq.ctx) ctx.push_back(f.str());
  for (const auto& f : d.seq.ext) ext.push_back(f.str());
  j["sequent"] = {{"ctx", ctx}, {"ext", ext}};
  j["rule"] = d.rule;
  if (d.principal >= 0) j["principal"] = d.principal;
  if (!d.axiom.empty()) j["axiom"] = d.axiom;
  if (!d.term.empty()) j["term"] = d.term;
  if (!d.eigen.empty()) j["eigen"] = d.eigen;
  nlohmann::json kids = nlohmann::json::array();
  for (const auto& k : d.kids) kids.push_back(derivation_to_json(k));
  j["children"] = kids;
  return j;
}

MetaDerivation derivation_from_json(const nlohmann::json& j) {
  MetaDerivation d;
  const auto& s = j.at("sequent");
  for (const auto& f : s.at("ctx")) d.seq.ctx.push_back(parse_meta(f.get<std::string>()));
  for (const auto& f : s.at("ext")) d.seq.ext.push_back(parse_meta(f.get<std::string>()));
  d.rule = j.at("rule").get<std::string>();
  d.principal = j.value("principal", -1);
  d.axiom = j.value("axiom", std::string());
  d.term = j.value("term", std::string());
  d.eigen = j.value("eigen", std::string());
  if (j.contains("children"))
    for (const auto& k : j.at("children")) d.kids.push_back(derivation_from_json(k));
  return d;
}

// ---------------------------------------------------------------- tactics

void NameSupply::reserve(const MetaSequent& s) {
  for (const auto& w : s.free_worlds()) used_.insert(w);
}

std::string NameSupply::fresh() {
  for (;;) {
    std::string n = "w" + std::to_string(next_++);
    if (used_.insert(n).second) return n;
  }
}

int Builder::find(const std::vector<MetaFormula>& v, const MetaFormula& f) {
  for (std::size_t k = 0; k < v.size(); ++k)
    if (v[k] == f) return static_cast<int>(k);
  return -1;
}

Builder::G Builder::make(G g, std::string rule, MetaSequent prem) {
  g->rule = std::move(rule);
  g->kids.clear();
  g->kids.push_back(MetaDerivation{std::move(prem), {}, -1, {}, {}, {}, {}});
  return &g->kids.back();
}

namespace {
void need(bool ok, const char* what) {
  if (!ok) throw std::logic_error(std::string("builder: ") + what);
}
MetaDerivation open(MetaSequent s) { return MetaDerivation{std::move(s), {}, -1, {}, {}, {}, {}}; }
}  // namespace

Builder::G Builder::wL(G g, int i) {
  need(i >= 0 && i < static_cast<int>(g->seq.ctx.size()), "wL index");
  g->principal = i;
  return make(g, "wL", {erase(g->seq.ctx, i), g->seq.ext});
}

Builder::G Builder::wR(G g, int i) {
  need(i >= 0 && i < static_cast<int>(g->seq.ext.size()), "wR index");
  g->principal = i;
  return make(g, "wR", {g->seq.ctx, erase(g->seq.ext, i)});
}

Builder::G Builder::andL(G g, int i) {
  const MetaFormula f = g->seq.ctx.at(static_cast<std::size_t>(i));
  need(f.is(MK::And), "andL principal");
  g->principal = i;
  return make(g, "andL", {plus(erase(g->seq.ctx, i), {f.left(), f.right()}), g->seq.ext});
}

std::pair<Builder::G, Builder::G> Builder::andR(G g, int i) {
  const MetaFormula f = g->seq.ext.at(static_cast<std::size_t>(i));
  need(f.is(MK::And), "andR principal");
  g->principal = i;
  g->rule = "andR";
  g->kids = {open({g->seq.ctx, plus(erase(g->seq.ext, i), {f.left()})}),
             open({g->seq.ctx, plus(erase(g->seq.ext, i), {f.right()})})};
  return {&g->kids[0], &g->kids[1]};
}

std::pair<Builder::G, Builder::G> Builder::orL(G g, int i) {
  const MetaFormula f = g->seq.ctx.at(static_cast<std::size_t>(i));
  need(f.is(MK::Or), "orL principal");
  g->principal = i;
  g->rule = "orL";
  g->kids = {open({plus(erase(g->seq.ctx, i), {f.left()}), g->seq.ext}),
             open({plus(erase(g->seq.ctx, i), {f.right()}), g->seq.ext})};
  return {&g->kids[0], &g->kids[1]};
}

Builder::G Builder::orR(G g, int i) {
  const MetaFormula f = g->seq.ext.at(static_cast<std::size_t>(i));
  need(f.is(MK::Or), "orR principal");
  g->principal = i;
  return make(g, "orR", {g->seq.ctx, plus(erase(g->seq.ext, i), {f.left(), f.right()})});
}

std::pair<Builder::G, Builder::G> Builder::impL(G g, int i) {
  const MetaFormula f = g->seq.ctx.at(static_cast<std::size_t>(i));
  need(f.is(MK::Imp), "impL principal");
  g->principal = i;
  g->rule = "impL";
  g->kids = {open({erase(g->seq.ctx, i), plus(g->seq.ext, {f.left()})}),
             open({plus(erase(g->seq.ctx, i), {f.right()}), g->seq.ext})};
  return {&g->kids[0], &g->kids[1]};
}

Builder::G Builder::impR(G g) {
  need(g->seq.ext.size() == 1 && g->seq.ext[0].is(MK::Imp), "impR shape");
  const MetaFormula f = g->seq.ext[0];
  g->principal = 0;
  return make(g, "impR", {plus(g->seq.ctx, {f.left()}), {f.right()}});
}

Builder::G Builder::allL(G g, int i, const std::string& term) {
  const MetaFormula f = g->seq.ctx.at(static_cast<std::size_t>(i));
  g->principal = i;
  g->term = term;
  return make(g, "allL", {plus(erase(g->seq.ctx, i), {instantiate(f, term)}), g->seq.ext});
}

Builder::G Builder::allL_axiom(G g, const std::string& axiom, const std::string& term) {
  const MetaFormula* q = th_.find(axiom);
  need(q != nullptr, "unknown axiom");
  g->axiom = axiom;
  g->term = term;
  return make(g, "allL", {plus(g->seq.ctx, {instantiate(*q, term)}), g->seq.ext});
}

Builder::G Builder::allR(G g, const std::string& eigen) {
  need(g->seq.ext.size() == 1, "allR needs a single extract");
  const MetaFormula f = g->seq.ext[0];
  g->principal = 0;
  g->eigen = eigen;
  return make(g, "allR", {g->seq.ctx, {instantiate(f, eigen)}});
}

Builder::G Builder::exL(G g, int i, const std::string& eigen) {
  const MetaFormula f = g->seq.ctx.at(static_cast<std::size_t>(i));
  g->principal = i;
  g->eigen = eigen;
  return make(g, "exL", {plus(erase(g->seq.ctx, i), {instantiate(f, eigen)}), g->seq.ext});
}

Builder::G Builder::exR(G g, int i, const std::string& term) {
  const MetaFormula f = g->seq.ext.at(static_cast<std::size_t>(i));
  g->principal = i;
  g->term = term;
  return make(g, "exR", {g->seq.ctx, plus(erase(g->seq.ext, i), {instantiate(f, term)})});
}

void Builder::id(G g) {
  g->rule = "id";
  g->kids.clear();
}

void Builder::verum(G g) {
  g->rule = "verumR";
  g->kids.clear();
}

void Builder::hyp(G g) {
  g->rule = "hyp";
  g->kids.clear();
}

Builder::G Builder::keep(G g, const std::vector<MetaFormula>& ctx, const std::vector<MetaFormula>& ext) {
  auto trim = [&](bool left, const std::vector<MetaFormula>& want) {
    std::vector<std::string> w;
    for (const auto& f : want) w.push_back(f.str());
    const V& side = left ? g->seq.ctx : g->seq.ext;
    std::vector<int> drop;
    for (int k = 0; k < static_cast<int>(side.size()); ++k) {
      auto it = std::find(w.begin(), w.end(), side[static_cast<std::size_t>(k)].str());
      if (it != w.end()) w.erase(it);
      else drop.push_back(k);
    }
    need(w.empty(), "keep: missing formula");
    for (auto it = drop.rbegin(); it != drop.rend(); ++it) g = left ? wL(g, *it) : wR(g, *it);
  };
  trim(true, ctx);
  trim(false, ext);
  return g;
}

void Builder::close(G g, const MetaFormula& f) { id(keep(g, {f}, {f})); }

Builder::G Builder::inst(G g, const std::string& axiom, const std::vector<std::string>& terms) {
  need(!terms.empty(), "inst needs a term");
  g = allL_axiom(g, axiom, terms[0]);
  for (std::size_t k = 1; k < terms.size(); ++k) g = allL(g, static_cast<int>(g->seq.ctx.size()) - 1, terms[k]);
  return g;
}

std::optional<std::vector<std::string>> match_axiom(const Theory& th, const std::string& axiom,
                                                    const MetaFormula& target, bool lhs) {
  const MetaFormula* q = th.find(axiom);
  if (!q) return std::nullopt;
  std::vector<std::string> vars;
  MetaFormula body = *q;
  while (body.is(MK::ForallW) || body.is(MK::ForallF)) {
    vars.push_back(body.var());
    body = body.body();
  }
  if (!body.is(MK::Imp)) return std::nullopt;
  std::map<std::string, std::string> bind;
  auto is_var = [&](const std::string& v) { return std::find(vars.begin(), vars.end(), v) != vars.end(); };
  auto bind_w = [&](const std::string& p, const std::string& t) {
    if (!is_var(p)) return p == t;
    auto [it, ins] = bind.emplace(p, t);
    return ins || it->second == t;
  };
  std::function<bool(const Formula&, const Formula&)> mf = [&](const Formula& p, const Formula& t) {
    if (p.is(FKind::Atom) && is_var(p.name())) {
      auto [it, ins] = bind.emplace(p.name(), t.str());
      return ins || it->second == t.str();
    }
    if (p.kind() != t.kind()) return false;
    if (p.is(FKind::Atom)) return p.name() == t.name();
    if (!p.is_binary()) return true;
    return mf(p.left(), t.left()) && mf(p.right(), t.right());
  };
  std::function<bool(const MetaFormula&, const MetaFormula&)> mm = [&](const MetaFormula& p, const MetaFormula& t) {
    if (p.kind() != t.kind()) return false;
    switch (p.kind()) {
      case MK::Sat: return bind_w(p.worlds()[0], t.worlds()[0]) && mf(p.formula(), t.formula());
      case MK::Rel: case MK::Leq: case MK::Eq:
        for (std::size_t k = 0; k < p.worlds().size(); ++k)
          if (!bind_w(p.worlds()[k], t.worlds()[k])) return false;
        return true;
      case MK::Verum: case MK::Falsum: return true;
      case MK::And: case MK::Or: case MK::Imp: return mm(p.left(), t.left()) && mm(p.right(), t.right());
      default: return p.var() == t.var() && mm(p.body(), t.body());
    }
  };
  if (!mm(lhs ? body.left() : body.right(), target)) return std::nullopt;
  std::vector<std::string> terms;
  for (const auto& v : vars) {
    auto it = bind.find(v);
    if (it == bind.end()) return std::nullopt;
    terms.push_back(it->second);
  }
  return terms;
}

Builder::G Builder::resolve_left(G g, const std::string& axiom, int i) {
  const MetaFormula a = g->seq.ctx.at(static_cast<std::size_t>(i));
  auto terms = match_axiom(th_, axiom, a, true);
  need(terms.has_value(), "resolve_left: no match");
  g = inst(g, axiom, *terms);
  auto [l, r] = impL(g, static_cast<int>(g->seq.ctx.size()) - 1);
  close(l, a);
  return wL(r, i);
}

Builder::G Builder::resolve_right(G g, const std::string& axiom, int i) {
  const MetaFormula b = g->seq.ext.at(static_cast<std::size_t>(i));
  auto terms = match_axiom(th_, axiom, b, false);
  need(terms.has_value(), "resolve_right: no match");
  g = inst(g, axiom, *terms);
  auto [l, r] = impL(g, static_cast<int>(g->seq.ctx.size()) - 1);
  close(r, b);
  return wR(l, i);
}

void Builder::prove_by_lookup(G g, const MetaFormula& goal, const std::vector<std::string>& witnesses,
                              std::size_t& wi) {
  g = keep(g, g->seq.ctx, {goal});
  if (find(g->seq.ctx, goal) >= 0) {
    close(g, goal);
  } else if (goal.is(MK::Verum)) {
    verum(keep(g, {}, {goal}));
  } else if (goal.is(MK::And)) {
    auto [l, r] = andR(g, 0);
    prove_by_lookup(l, goal.left(), witnesses, wi);
    prove_by_lookup(r, goal.right(), witnesses, wi);
  } else if (goal.is(MK::ExistsW) || goal.is(MK::ExistsF)) {
    need(wi < witnesses.size(), "derive: missing witness");
    const std::string& t = witnesses[wi++];
    G k = exR(g, 0, t);
    prove_by_lookup(k, instantiate(goal, t), witnesses, wi);
  } else {
    throw std::logic_error("builder: cannot discharge " + goal.str() + " from " + g->seq.str());
  }
}

Builder::G Builder::derive(G g, const std::string& axiom, const std::vector<std::string>& terms,
                           const std::vector<std::string>& witnesses) {
  g = inst(g, axiom, terms);
  std::size_t wi = 0;
  // A fact is left in ctx as is; each antecedent of a rule is discharged in turn.
  while (g->seq.ctx.back().is(MK::Imp)) {
    const MetaFormula ins = g->seq.ctx.back();
    auto [l, r] = impL(g, static_cast<int>(g->seq.ctx.size()) - 1);
    prove_by_lookup(l, ins.left(), witnesses, wi);
    g = r;
  }
  return g;
}

// ---------------------------------------------------------------- resolution, unpacking

namespace {

std::string clause_axiom(const std::string& clause, Side side) {
  static const std::set<std::string> known = {"top", "bot", "and", "or", "imp", "star", "wand"};
  if (!known.count(clause)) throw std::invalid_argument("unknown clause '" + clause + "'");
  if (clause == "top" && side == Side::Left) throw std::invalid_argument("the T clause has no left direction");
  if (clause == "bot" && side == Side::Right) throw std::invalid_argument("the F clause has no right direction");
  return clause + (side == Side::Left ? "_l" : "_r");
}

}  // namespace

Resolution resolve(const MetaSequent& ms, const std::string& clause, Side side, int index, NameSupply& names) {
  names.reserve(ms);
  Resolution res{{}, open(ms)};
  Builder b(sigma_bi(), names);
  std::string ax = clause_axiom(clause, side);
  Builder::G g = &res.fragment;
  if (side == Side::Left) {
    g = b.resolve_left(g, ax, index);
  } else {
    g = b.resolve_right(g, ax, index);
    while (g->seq.ext.size() == 1 && g->seq.ext[0].is(MK::ForallW)) g = b.allR(g, names.fresh());
  }
  b.hyp(g);
  res.premiss = g->seq;
  return res;
}

namespace {

Builder::G unpack_one(Builder& b, Builder::G g, int i) {
  const MetaFormula a = g->seq.ctx[static_cast<std::size_t>(i)];
  if (a.formula().is(FKind::And)) {
    g = b.resolve_left(g, "and_l", i);
    return b.andL(g, static_cast<int>(g->seq.ctx.size()) - 1);
  }
  g = b.resolve_left(g, "star_l", i);
  auto last = [&] { return static_cast<int>(g->seq.ctx.size()) - 1; };
  g = b.exL(g, last(), b.names().fresh());
  g = b.exL(g, last(), b.names().fresh());
  g = b.andL(g, last());
  return b.andL(g, last());
}

// One rebuild step: take an available assertion, split a conjunction, or compose along a relation atom.
struct PackStep {
  enum Kind { Take, And, Star } kind;
  MetaFormula rel = MetaFormula::verum();  // Star
};

using Goals = std::vector<std::pair<std::string, Formula>>;

int take(V& avail, const MetaFormula& f) {
  int k = Builder::find(avail, f);
  if (k >= 0) avail.erase(avail.begin() + k);
  return k;
}

// Depth-first over the goals in order, each consuming its ingredients once, backtracking
// over which copy or relation atom serves which goal.
bool plan_pack(V avail, Goals goals, std::vector<PackStep>& out) {
  if (goals.empty()) return true;
  const auto [w, f] = goals.front();
  Goals rest(goals.begin() + 1, goals.end());
  {
    V a = avail;
    if (take(a, MetaFormula::sat(w, f)) >= 0) {
      out.push_back({PackStep::Take});
      if (plan_pack(std::move(a), rest, out)) return true;
      out.pop_back();
    }
  }
  if (f.is(FKind::And)) {
    Goals g{{w, f.left()}, {w, f.right()}};
    g.insert(g.end(), rest.begin(), rest.end());
    out.push_back({PackStep::And});
    if (plan_pack(avail, std::move(g), out)) return true;
    out.pop_back();
  }
  if (f.is(FKind::Star))
    for (const auto& c : avail) {
      if (!c.is(MK::Rel) || c.worlds()[0] != w) continue;
      V a = avail;
      take(a, c);
      Goals g{{c.worlds()[1], f.left()}, {c.worlds()[2], f.right()}};
      g.insert(g.end(), rest.begin(), rest.end());
      out.push_back({PackStep::Star, c});
      if (plan_pack(std::move(a), std::move(g), out)) return true;
      out.pop_back();
    }
  return false;
}

// Adds w |= f to ctx following the plan; `used` collects what the result makes redundant in ctx.
Builder::G build_sat(Builder& b, Builder::G g, const std::string& w, const Formula& f,
                     std::vector<PackStep>::const_iterator& step, V& used) {
  const PackStep st = *step++;
  if (st.kind == PackStep::Take) return g;
  if (st.kind == PackStep::And) {
    g = build_sat(b, g, w, f.left(), step, used);
    g = build_sat(b, g, w, f.right(), step, used);
    used.push_back(MetaFormula::sat(w, f.left()));
    used.push_back(MetaFormula::sat(w, f.right()));
    return b.derive(g, "and_r", {w, f.left().str(), f.right().str()});
  }
  const std::string u = st.rel.worlds()[1], v = st.rel.worlds()[2];
  used.push_back(st.rel);
  g = build_sat(b, g, u, f.left(), step, used);
  g = build_sat(b, g, v, f.right(), step, used);
  used.push_back(MetaFormula::sat(u, f.left()));
  used.push_back(MetaFormula::sat(v, f.right()));
  return b.derive(g, "star_r", {w, f.left().str(), f.right().str()}, {u, v});
}

}  // namespace

Unpacked unpack(const MetaSequent& ms, NameSupply& names) {
  names.reserve(ms);
  Unpacked u{{}, open(ms)};
  Builder b(sigma_bi(), names);
  Builder::G g = &u.fragment;
  for (;;) {
    int hit = -1;
    for (int k = 0; k < static_cast<int>(g->seq.ctx.size()) && hit < 0; ++k) {
      const auto& c = g->seq.ctx[static_cast<std::size_t>(k)];
      if (c.is(MK::Sat) && (c.formula().is(FKind::And) || c.formula().is(FKind::Star))) hit = k;
    }
    if (hit < 0) break;
    g = unpack_one(b, g, hit);
  }
  b.hyp(g);
  u.out = g->seq;
  return u;
}

Unpacked pack(const MetaSequent& ms, const std::string& w, const Formula& f, NameSupply& names) {
  names.reserve(ms);
  Unpacked u{{}, open(ms)};
  Builder b(sigma_bi(), names);
  std::vector<PackStep> plan;
  if (!plan_pack(ms.ctx, {{w, f}}, plan)) throw std::logic_error("pack: no composition for " + MetaFormula::sat(w, f).str());
  V used;
  auto step = plan.cbegin();
  Builder::G g = build_sat(b, &u.fragment, w, f, step, used);
  for (const auto& c : used) {
    int k = Builder::find(g->seq.ctx, c);
    if (k >= 0) g = b.wL(g, k);
  }
  b.hyp(g);
  u.out = g->seq;
  return u;
}

Unpacked pack(const MetaSequent& ms, const std::string& w, const Bunch& shape, NameSupply& names) {
  return pack(ms, w, compact(shape), names);
}

}  // namespace bi
