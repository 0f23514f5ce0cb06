// Formulas, bunches and sequents of BI; surface grammar; coherent equivalence.
#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bi {

enum class FKind : std::uint8_t { Atom, Top, Bottom, MultTop, And, Or, Imp, Star, Wand };

struct FNode;

// Immutable, shared formula tree. Never null.
class Formula {
 public:
  static Formula atom(std::string name);
  static Formula top();
  static Formula bottom();
  static Formula mtop();
  static Formula binary(FKind k, Formula l, Formula r);
  static Formula conj(Formula l, Formula r) { return binary(FKind::And, std::move(l), std::move(r)); }
  static Formula disj(Formula l, Formula r) { return binary(FKind::Or, std::move(l), std::move(r)); }
  static Formula imp(Formula l, Formula r) { return binary(FKind::Imp, std::move(l), std::move(r)); }
  static Formula star(Formula l, Formula r) { return binary(FKind::Star, std::move(l), std::move(r)); }
  static Formula wand(Formula l, Formula r) { return binary(FKind::Wand, std::move(l), std::move(r)); }

  FKind kind() const;
  bool is(FKind k) const { return kind() == k; }
  bool is_binary() const;
  const std::string& name() const;  // atoms only
  const Formula& left() const;      // binaries only
  const Formula& right() const;
  std::size_t size() const;         // node count

  std::string str() const;
  friend bool operator==(const Formula& a, const Formula& b);
  friend std::strong_ordering operator<=>(const Formula& a, const Formula& b);

 private:
  explicit Formula(std::shared_ptr<const FNode> n) : n_(std::move(n)) {}
  std::shared_ptr<const FNode> n_;
};

struct FNode {
  FKind kind;
  std::string name;
  std::optional<Formula> l, r;
  std::size_t size = 1;
};

enum class BKind : std::uint8_t { AddUnit, MultUnit, Leaf, Semi, Comma };

struct BNode;

enum class Step : std::uint8_t { L, R };
using BunchPath = std::vector<Step>;

std::string path_str(const BunchPath& p);
BunchPath parse_path(const std::string& s);  // "LRL"; "" or "e" is the root

// Immutable, shared bunch tree. Semi is the additive former, Comma the multiplicative one.
class Bunch {
 public:
  static Bunch leaf(Formula f);
  static Bunch add_unit();
  static Bunch mult_unit();
  static Bunch semi(Bunch l, Bunch r);
  static Bunch comma(Bunch l, Bunch r);
  static Bunch node(BKind former, Bunch l, Bunch r);

  BKind kind() const;
  bool is(BKind k) const { return kind() == k; }
  bool is_unit() const { return is(BKind::AddUnit) || is(BKind::MultUnit); }
  bool is_former() const { return is(BKind::Semi) || is(BKind::Comma); }
  const Formula& formula() const;  // leaves only
  const Bunch& left() const;       // formers only
  const Bunch& right() const;
  std::size_t size() const;

  const Bunch& at(const BunchPath& p) const;  // throws std::out_of_range
  bool has_path(const BunchPath& p) const;

  std::string str() const;
  friend bool operator==(const Bunch& a, const Bunch& b);
  friend std::strong_ordering operator<=>(const Bunch& a, const Bunch& b);

 private:
  explicit Bunch(std::shared_ptr<const BNode> n) : n_(std::move(n)) {}
  std::shared_ptr<const BNode> n_;
};

struct BNode {
  BKind kind;
  std::optional<Formula> f;
  std::optional<Bunch> l, r;
  std::size_t size = 1;
};

// Γ : φ, or the empty sequent □.
struct Sequent {
  std::optional<Bunch> context;
  std::optional<Formula> extract;

  static Sequent box() { return {}; }
  static Sequent make(Bunch g, Formula f) { return {std::move(g), std::move(f)}; }
  bool is_box() const { return !context.has_value(); }
  const Bunch& ctx() const { return *context; }
  const Formula& goal() const { return *extract; }

  std::string str() const;
  friend bool operator==(const Sequent&, const Sequent&) = default;
  friend std::strong_ordering operator<=>(const Sequent& a, const Sequent& b);
};

struct ParseError : std::runtime_error {
  int line, column;
  ParseError(const std::string& msg, int line, int column);
};

Formula parse_formula(const std::string& text);
Bunch parse_bunch(const std::string& text);
Sequent parse_sequent(const std::string& text);

// Elements of a maximal same-former group rooted at b, left to right.
std::vector<Bunch> flatten(const Bunch& b, BKind former);
// Left-associated rebuild; xs nonempty.
Bunch build(BKind former, const std::vector<Bunch>& xs);

Bunch normalize(const Bunch& b);
Sequent normalize(const Sequent& s);
bool equiv(const Bunch& a, const Bunch& b);

// Every node, root first, in preorder (left before right).
std::vector<BunchPath> subbunch_positions(const Bunch& b);
Bunch replace(const Bunch& b, const BunchPath& p, const Bunch& c);  // throws std::out_of_range
Formula compact(const Bunch& b);

// All subformulas of the sequent (context leaves and extract), deduplicated, ordered.
std::vector<Formula> subformulas(const Sequent& s);
std::vector<std::string> atoms_of(const Sequent& s);
void collect_atoms(const Formula& f, std::vector<std::string>& out);

}  // namespace bi
