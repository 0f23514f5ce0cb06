#include "bi/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace bi {

// ---------------------------------------------------------------- formulas

Formula Formula::atom(std::string name) {
  auto n = std::make_shared<FNode>();
  n->kind = FKind::Atom;
  n->name = std::move(name);
  return Formula(std::move(n));
}

Formula Formula::top() {
  static const Formula t = [] {
    auto n = std::make_shared<FNode>();
    n->kind = FKind::Top;
    return Formula(std::move(n));
  }();
  return t;
}

Formula Formula::bottom() {
  static const Formula t = [] {
    auto n = std::make_shared<FNode>();
    n->kind = FKind::Bottom;
    return Formula(std::move(n));
  }();
  return t;
}

Formula Formula::mtop() {
  static const Formula t = [] {
    auto n = std::make_shared<FNode>();
    n->kind = FKind::MultTop;
    return Formula(std::move(n));
  }();
  return t;
}

Formula Formula::binary(FKind k, Formula l, Formula r) {
  if (k == FKind::Atom || k == FKind::Top || k == FKind::Bottom || k == FKind::MultTop)
    throw std::invalid_argument("Formula::binary: not a binary connective");
  auto n = std::make_shared<FNode>();
  n->kind = k;
  n->size = 1 + l.size() + r.size();
  n->l = std::move(l);
  n->r = std::move(r);
  return Formula(std::move(n));
}

FKind Formula::kind() const { return n_->kind; }
bool Formula::is_binary() const { return n_->l.has_value(); }
const std::string& Formula::name() const { return n_->name; }
const Formula& Formula::left() const { return *n_->l; }
const Formula& Formula::right() const { return *n_->r; }
std::size_t Formula::size() const { return n_->size; }

bool operator==(const Formula& a, const Formula& b) {
  if (a.n_ == b.n_) return true;
  if (a.kind() != b.kind() || a.size() != b.size()) return false;
  if (a.kind() == FKind::Atom) return a.name() == b.name();
  if (!a.is_binary()) return true;
  return a.left() == b.left() && a.right() == b.right();
}

std::strong_ordering operator<=>(const Formula& a, const Formula& b) {
  if (a.n_ == b.n_) return std::strong_ordering::equal;
  if (auto c = a.kind() <=> b.kind(); c != 0) return c;
  if (a.kind() == FKind::Atom) return a.name() <=> b.name();
  if (!a.is_binary()) return std::strong_ordering::equal;
  if (auto c = a.left() <=> b.left(); c != 0) return c;
  return a.right() <=> b.right();
}

namespace {

int prec(FKind k) {
  switch (k) {
    case FKind::And:
    case FKind::Star: return 3;
    case FKind::Or: return 2;
    case FKind::Imp:
    case FKind::Wand: return 1;
    default: return 4;
  }
}

const char* op_text(FKind k) {
  switch (k) {
    case FKind::And: return " /\\ ";
    case FKind::Or: return " \\/ ";
    case FKind::Imp: return " -> ";
    case FKind::Star: return " * ";
    case FKind::Wand: return " -* ";
    default: return "";
  }
}

void print_formula(const Formula& f, std::string& out) {
  switch (f.kind()) {
    case FKind::Atom: out += f.name(); return;
    case FKind::Top: out += 'T'; return;
    case FKind::Bottom: out += 'F'; return;
    case FKind::MultTop: out += 'I'; return;
    default: break;
  }
  const int p = prec(f.kind());
  const bool right_assoc = p == 1;
  auto sub = [&](const Formula& c, bool parens) {
    if (parens) out += '(';
    print_formula(c, out);
    if (parens) out += ')';
  };
  const int pl = prec(f.left().kind()), pr = prec(f.right().kind());
  sub(f.left(), right_assoc ? pl <= p : pl < p);
  out += op_text(f.kind());
  sub(f.right(), right_assoc ? pr < p : pr <= p);
}

}  // namespace

std::string Formula::str() const {
  std::string s;
  print_formula(*this, s);
  return s;
}

// ---------------------------------------------------------------- bunches

std::string path_str(const BunchPath& p) {
  std::string s;
  for (Step st : p) s += st == Step::L ? 'L' : 'R';
  return s;
}

BunchPath parse_path(const std::string& s) {
  BunchPath p;
  if (s == "e") return p;
  for (char c : s) {
    if (c == 'L') p.push_back(Step::L);
    else if (c == 'R') p.push_back(Step::R);
    else throw std::invalid_argument("bad path character '" + std::string(1, c) + "'");
  }
  return p;
}

Bunch Bunch::leaf(Formula f) {
  auto n = std::make_shared<BNode>();
  n->kind = BKind::Leaf;
  n->f = std::move(f);
  return Bunch(std::move(n));
}

Bunch Bunch::add_unit() {
  static const Bunch u = [] {
    auto n = std::make_shared<BNode>();
    n->kind = BKind::AddUnit;
    return Bunch(std::move(n));
  }();
  return u;
}

Bunch Bunch::mult_unit() {
  static const Bunch u = [] {
    auto n = std::make_shared<BNode>();
    n->kind = BKind::MultUnit;
    return Bunch(std::move(n));
  }();
  return u;
}

Bunch Bunch::node(BKind former, Bunch l, Bunch r) {
  if (former != BKind::Semi && former != BKind::Comma) throw std::invalid_argument("Bunch::node: not a former");
  auto n = std::make_shared<BNode>();
  n->kind = former;
  n->size = 1 + l.size() + r.size();
  n->l = std::move(l);
  n->r = std::move(r);
  return Bunch(std::move(n));
}

Bunch Bunch::semi(Bunch l, Bunch r) { return node(BKind::Semi, std::move(l), std::move(r)); }
Bunch Bunch::comma(Bunch l, Bunch r) { return node(BKind::Comma, std::move(l), std::move(r)); }

BKind Bunch::kind() const { return n_->kind; }
const Formula& Bunch::formula() const { return *n_->f; }
const Bunch& Bunch::left() const { return *n_->l; }
const Bunch& Bunch::right() const { return *n_->r; }
std::size_t Bunch::size() const { return n_->size; }

const Bunch& Bunch::at(const BunchPath& p) const {
  const Bunch* cur = this;
  for (Step s : p) {
    if (!cur->is_former()) throw std::out_of_range("invalid bunch path " + path_str(p));
    cur = s == Step::L ? &cur->left() : &cur->right();
  }
  return *cur;
}

bool Bunch::has_path(const BunchPath& p) const {
  const Bunch* cur = this;
  for (Step s : p) {
    if (!cur->is_former()) return false;
    cur = s == Step::L ? &cur->left() : &cur->right();
  }
  return true;
}

bool operator==(const Bunch& a, const Bunch& b) {
  if (a.n_ == b.n_) return true;
  if (a.kind() != b.kind() || a.size() != b.size()) return false;
  if (a.kind() == BKind::Leaf) return a.formula() == b.formula();
  if (!a.is_former()) return true;
  return a.left() == b.left() && a.right() == b.right();
}

std::strong_ordering operator<=>(const Bunch& a, const Bunch& b) {
  if (a.n_ == b.n_) return std::strong_ordering::equal;
  if (auto c = a.kind() <=> b.kind(); c != 0) return c;
  if (a.kind() == BKind::Leaf) return a.formula() <=> b.formula();
  if (!a.is_former()) return std::strong_ordering::equal;
  if (auto c = a.left() <=> b.left(); c != 0) return c;
  return a.right() <=> b.right();
}

namespace {

void print_bunch(const Bunch& b, std::string& out) {
  switch (b.kind()) {
    case BKind::AddUnit: out += "@a"; return;
    case BKind::MultUnit: out += "@m"; return;
    case BKind::Leaf: out += b.formula().str(); return;
    default: break;
  }
  auto sub = [&](const Bunch& c, bool parens) {
    if (parens) out += '(';
    print_bunch(c, out);
    if (parens) out += ')';
  };
  // Left children of the same former print flat (left association).
  sub(b.left(), b.left().is_former() && b.left().kind() != b.kind());
  out += b.is(BKind::Semi) ? " ; " : " , ";
  sub(b.right(), b.right().is_former());
}

}  // namespace

std::string Bunch::str() const {
  std::string s;
  print_bunch(*this, s);
  return s;
}

std::string Sequent::str() const {
  if (is_box()) return "|-";
  return ctx().str() + " |- " + goal().str();
}

std::strong_ordering operator<=>(const Sequent& a, const Sequent& b) {
  if (a.is_box() || b.is_box()) return b.is_box() <=> a.is_box();
  if (auto c = a.ctx() <=> b.ctx(); c != 0) return c;
  return a.goal() <=> b.goal();
}

// ---------------------------------------------------------------- parser

ParseError::ParseError(const std::string& msg, int l, int c)
    : std::runtime_error(std::to_string(l) + ":" + std::to_string(c) + ": " + msg), line(l), column(c) {}

namespace {

enum class Tok { Ident, Top, Bot, MTop, And, Or, Imp, Star, Wand, LParen, RParen, Semi, Comma, AUnit, MUnit, Turn, End };

struct Token {
  Tok t;
  std::string text;
  int line, col;
};

std::vector<Token> lex(const std::string& s) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto adv = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (s[i] == '\n') { ++line; col = 1; } else { ++col; }
      ++i;
    }
  };
  auto starts = [&](const char* lit) { return s.compare(i, std::char_traits<char>::length(lit), lit) == 0; };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) { adv(1); continue; }
    Token tk{Tok::End, "", line, col};
    if (std::islower(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      tk.t = Tok::Ident;
      tk.text = s.substr(i, j - i);
      adv(j - i);
    } else if (std::isupper(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      std::string w = s.substr(i, j - i);
      if (w == "T") tk.t = Tok::Top;
      else if (w == "F") tk.t = Tok::Bot;
      else if (w == "I") tk.t = Tok::MTop;
      else throw ParseError("unknown constant '" + w + "'", line, col);
      tk.text = w;
      adv(j - i);
    } else if (starts("/\\")) { tk.t = Tok::And; tk.text = "/\\"; adv(2); }
    else if (starts("\\/")) { tk.t = Tok::Or; tk.text = "\\/"; adv(2); }
    else if (starts("->")) { tk.t = Tok::Imp; tk.text = "->"; adv(2); }
    else if (starts("-*")) { tk.t = Tok::Wand; tk.text = "-*"; adv(2); }
    else if (starts("|-")) { tk.t = Tok::Turn; tk.text = "|-"; adv(2); }
    else if (starts("@a")) { tk.t = Tok::AUnit; tk.text = "@a"; adv(2); }
    else if (starts("@m")) { tk.t = Tok::MUnit; tk.text = "@m"; adv(2); }
    else if (c == '*') { tk.t = Tok::Star; tk.text = "*"; adv(1); }
    else if (c == '(') { tk.t = Tok::LParen; tk.text = "("; adv(1); }
    else if (c == ')') { tk.t = Tok::RParen; tk.text = ")"; adv(1); }
    else if (c == ';') { tk.t = Tok::Semi; tk.text = ";"; adv(1); }
    else if (c == ',') { tk.t = Tok::Comma; tk.text = ","; adv(1); }
    else throw ParseError("unexpected character '" + std::string(1, c) + "'", line, col);
    out.push_back(std::move(tk));
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : toks_(lex(s)) {}

  Formula formula() { return imp(); }

  Bunch group() {
    Bunch acc = item();
    std::optional<Tok> sep;
    while (peek().t == Tok::Semi || peek().t == Tok::Comma) {
      Token st = next();
      if (sep && *sep != st.t) throw ParseError("mixed ';' and ',' need parentheses", st.line, st.col);
      sep = st.t;
      Bunch rhs = item();
      acc = Bunch::node(st.t == Tok::Semi ? BKind::Semi : BKind::Comma, std::move(acc), std::move(rhs));
    }
    return acc;
  }

  const Token& peek() const { return toks_[pos_]; }
  Token next() { return toks_[pos_++]; }
  void expect(Tok t, const char* what) {
    if (peek().t != t) fail(std::string("expected ") + what);
    ++pos_;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    std::string got = t.t == Tok::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(msg + ", got " + got, t.line, t.col);
  }

 private:
  Bunch item() {
    const std::size_t save = pos_;
    if (peek().t == Tok::AUnit) { ++pos_; return Bunch::add_unit(); }
    if (peek().t == Tok::MUnit) { ++pos_; return Bunch::mult_unit(); }
    std::optional<ParseError> ferr;
    try {
      Formula f = formula();
      Tok t = peek().t;
      if (t == Tok::Semi || t == Tok::Comma || t == Tok::RParen || t == Tok::Turn || t == Tok::End)
        return Bunch::leaf(std::move(f));
      fail("expected ';', ',', ')' or '|-'");
    } catch (const ParseError& e) {
      ferr = e;
    }
    pos_ = save;
    if (peek().t != Tok::LParen) throw *ferr;
    ++pos_;
    Bunch b = [&] {
      try {
        return group();
      } catch (const ParseError& e) {
        // Report whichever reading got further.
        if (ferr->line > e.line || (ferr->line == e.line && ferr->column > e.column)) throw *ferr;
        throw;
      }
    }();
    expect(Tok::RParen, "')'");
    return b;
  }

  Formula imp() {
    Formula a = disj();
    if (peek().t == Tok::Imp || peek().t == Tok::Wand) {
      FKind k = next().t == Tok::Imp ? FKind::Imp : FKind::Wand;
      Formula b = imp();
      return Formula::binary(k, std::move(a), std::move(b));
    }
    return a;
  }

  Formula disj() {
    Formula a = conj();
    while (peek().t == Tok::Or) {
      ++pos_;
      a = Formula::disj(std::move(a), conj());
    }
    return a;
  }

  Formula conj() {
    Formula a = prim();
    while (peek().t == Tok::And || peek().t == Tok::Star) {
      FKind k = next().t == Tok::And ? FKind::And : FKind::Star;
      a = Formula::binary(k, std::move(a), prim());
    }
    return a;
  }

  Formula prim() {
    Token t = peek();
    switch (t.t) {
      case Tok::Ident: ++pos_; return Formula::atom(t.text);
      case Tok::Top: ++pos_; return Formula::top();
      case Tok::Bot: ++pos_; return Formula::bottom();
      case Tok::MTop: ++pos_; return Formula::mtop();
      case Tok::LParen: {
        ++pos_;
        Formula f = imp();
        expect(Tok::RParen, "')'");
        return f;
      }
      default: fail("expected a formula");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

void check_nonempty(const std::string& s) {
  if (std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); }))
    throw ParseError("empty input", 1, 1);
}

}  // namespace

Formula parse_formula(const std::string& text) {
  check_nonempty(text);
  Parser p(text);
  Formula f = p.formula();
  if (p.peek().t != Tok::End) p.fail("trailing input");
  return f;
}

Bunch parse_bunch(const std::string& text) {
  check_nonempty(text);
  Parser p(text);
  Bunch b = p.group();
  if (p.peek().t != Tok::End) p.fail("trailing input");
  return b;
}

Sequent parse_sequent(const std::string& text) {
  check_nonempty(text);
  Parser p(text);
  if (p.peek().t == Tok::Turn) {
    p.next();
    if (p.peek().t == Tok::End) return Sequent::box();
    p.fail("empty context (write @a or @m)");
  }
  Bunch b = p.group();
  p.expect(Tok::Turn, "'|-'");
  Formula f = p.formula();
  if (p.peek().t != Tok::End) p.fail("trailing input");
  return Sequent::make(std::move(b), std::move(f));
}

// ---------------------------------------------------------------- equivalence

namespace {
void flatten_into(const Bunch& b, BKind former, std::vector<Bunch>& out) {
  if (b.kind() == former) {
    flatten_into(b.left(), former, out);
    flatten_into(b.right(), former, out);
  } else {
    out.push_back(b);
  }
}
}  // namespace

std::vector<Bunch> flatten(const Bunch& b, BKind former) {
  std::vector<Bunch> out;
  flatten_into(b, former, out);
  return out;
}

Bunch build(BKind former, const std::vector<Bunch>& xs) {
  if (xs.empty()) throw std::invalid_argument("build: empty list");
  Bunch acc = xs[0];
  for (std::size_t i = 1; i < xs.size(); ++i) acc = Bunch::node(former, acc, xs[i]);
  return acc;
}

Bunch normalize(const Bunch& b) {
  if (!b.is_former()) return b;
  const BKind f = b.kind();
  const BKind unit = f == BKind::Semi ? BKind::AddUnit : BKind::MultUnit;
  std::vector<Bunch> raw = flatten(b, f), elems;
  for (const Bunch& x : raw) {
    Bunch y = normalize(x);
    if (y.kind() == f) {
      auto inner = flatten(y, f);
      elems.insert(elems.end(), inner.begin(), inner.end());
    } else {
      elems.push_back(std::move(y));
    }
  }
  std::vector<Bunch> kept;
  for (auto& e : elems)
    if (e.kind() != unit) kept.push_back(e);
  if (kept.empty()) return unit == BKind::AddUnit ? Bunch::add_unit() : Bunch::mult_unit();
  std::stable_sort(kept.begin(), kept.end(), [](const Bunch& x, const Bunch& y) { return x < y; });
  return build(f, kept);
}

Sequent normalize(const Sequent& s) {
  if (s.is_box()) return s;
  return Sequent::make(normalize(s.ctx()), s.goal());
}

bool equiv(const Bunch& a, const Bunch& b) { return normalize(a) == normalize(b); }

namespace {
void positions_into(const Bunch& b, BunchPath& cur, std::vector<BunchPath>& out) {
  out.push_back(cur);
  if (!b.is_former()) return;
  cur.push_back(Step::L);
  positions_into(b.left(), cur, out);
  cur.back() = Step::R;
  positions_into(b.right(), cur, out);
  cur.pop_back();
}

Bunch replace_from(const Bunch& b, const BunchPath& p, std::size_t i, const Bunch& c) {
  if (i == p.size()) return c;
  if (!b.is_former()) throw std::out_of_range("invalid bunch path " + path_str(p));
  if (p[i] == Step::L) return Bunch::node(b.kind(), replace_from(b.left(), p, i + 1, c), b.right());
  return Bunch::node(b.kind(), b.left(), replace_from(b.right(), p, i + 1, c));
}
}  // namespace

std::vector<BunchPath> subbunch_positions(const Bunch& b) {
  std::vector<BunchPath> out;
  BunchPath cur;
  positions_into(b, cur, out);
  return out;
}

Bunch replace(const Bunch& b, const BunchPath& p, const Bunch& c) { return replace_from(b, p, 0, c); }

Formula compact(const Bunch& b) {
  switch (b.kind()) {
    case BKind::AddUnit: return Formula::top();
    case BKind::MultUnit: return Formula::mtop();
    case BKind::Leaf: return b.formula();
    case BKind::Semi: return Formula::conj(compact(b.left()), compact(b.right()));
    case BKind::Comma: return Formula::star(compact(b.left()), compact(b.right()));
  }
  throw std::logic_error("compact: bad bunch");
}

namespace {
void subf_into(const Formula& f, std::set<Formula>& out) {
  if (!out.insert(f).second) return;
  if (f.is_binary()) {
    subf_into(f.left(), out);
    subf_into(f.right(), out);
  }
}
void leaves_into(const Bunch& b, std::set<Formula>& out) {
  if (b.is(BKind::Leaf)) subf_into(b.formula(), out);
  else if (b.is_former()) {
    leaves_into(b.left(), out);
    leaves_into(b.right(), out);
  }
}
}  // namespace

std::vector<Formula> subformulas(const Sequent& s) {
  std::set<Formula> out;
  if (!s.is_box()) {
    leaves_into(s.ctx(), out);
    subf_into(s.goal(), out);
  }
  return {out.begin(), out.end()};
}

void collect_atoms(const Formula& f, std::vector<std::string>& out) {
  if (f.is(FKind::Atom)) {
    if (std::find(out.begin(), out.end(), f.name()) == out.end()) out.push_back(f.name());
  } else if (f.is_binary()) {
    collect_atoms(f.left(), out);
    collect_atoms(f.right(), out);
  }
}

std::vector<std::string> atoms_of(const Sequent& s) {
  std::vector<std::string> out;
  for (const Formula& f : subformulas(s)) collect_atoms(f, out);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace bi
