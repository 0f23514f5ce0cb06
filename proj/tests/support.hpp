// Shared corpus and seeded generators for the unit and acceptance tests.
#pragma once

#include <random>
#include <string>
#include <vector>

#include "bi/syntax.hpp"

namespace bi::testing {

// Provable; each entry is checked at depth <= 8.
inline const std::vector<std::string>& theorem_corpus() {
  static const std::vector<std::string> v = {
      "p ; (p -> q) |- q",
      "p , (p -* q) |- q",
      "p * q |- q * p",
      "p * (q * r) |- (p * q) * r",
      "(p * q) * r |- p * (q * r)",
      "(p * q) -* r |- p -* (q -* r)",
      "p -* (q -* r) |- (p * q) -* r",
      "p |- p * I",
      "p * I |- p",
      "p |- p /\\ T",
      "p /\\ T |- p",
      "p * (q \\/ r) |- (p * q) \\/ (p * r)",
      "p , q |- p * q",
      "p ; (q , r) |- p /\\ (q * r)",
      "(p ; q) , @m |- (p /\\ q) * I",
      "@a |- T",
      "p ; @a ; p -> q |- q",
      "p /\\ q |- q /\\ p",
      "p \\/ q |- q \\/ p",
      "p ; q |- p",
      "@m |- p -* p",
      "p -* (q -* r), p, q |- r",
      "(p -> q) /\\ (q -> r) |- p -> r",
      "p * (q /\\ r) |- (p * q) /\\ (p * r)",
      "(p \\/ q) * r |- (p * r) \\/ (q * r)",
      "p -> (q -> r) |- (p /\\ q) -> r",
      "I |- p -* p",
      "F |- p",
      "(p -* q) * p |- q",
  };
  return v;
}

// phi = T, psi = T -* T: every a |- a on its own is valid, the double-negated combination is not provable.
inline const std::string kFixture = "((T -* F) -> F) ; (((T -* T) -* F) -> F) |- ((T * (T -* T)) -* F) -> F";

inline const std::vector<std::string>& non_theorem_corpus() {
  static const std::vector<std::string> v = {
      "@m |- p \\/ (p -> F)",
      "p /\\ q |- p * q",
      "p * q |- p /\\ q",
      "p |- p * p",
      "q |- p -* q",
      "T |- I",
      kFixture,
      "p |- q",
      "p -> q |- p -* q",
      "p -* q |- p -> q",
      "((p -> F) -> F) |- p",
      "p * p |- p",
  };
  return v;
}

// Random syntax over a fixed atom list; sizes count tree nodes.
class Gen {
 public:
  explicit Gen(unsigned seed, std::vector<std::string> atoms = {"p", "q", "r"}) : rng_(seed), atoms_(std::move(atoms)) {}

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

  Formula formula(int size) {
    if (size <= 1) {
      int k = uniform(0, static_cast<int>(atoms_.size()) + 2);
      if (k < static_cast<int>(atoms_.size())) return Formula::atom(atoms_[static_cast<std::size_t>(k)]);
      if (k == static_cast<int>(atoms_.size())) return Formula::top();
      if (k == static_cast<int>(atoms_.size()) + 1) return Formula::mtop();
      return coin(0.3) ? Formula::bottom() : Formula::atom(atoms_[0]);
    }
    static const FKind ks[] = {FKind::And, FKind::Or, FKind::Imp, FKind::Star, FKind::Wand};
    int l = uniform(1, size - 2 < 1 ? 1 : size - 2);
    return Formula::binary(ks[uniform(0, 4)], formula(l), formula(size - 1 - l < 1 ? 1 : size - 1 - l));
  }

  // Exactly `size` bunch nodes (odd sizes only reach full trees; even sizes round down).
  Bunch bunch(int size, int leaf_formula_size = 1) {
    if (size <= 2) {
      int k = uniform(0, 9);
      if (k == 0) return Bunch::add_unit();
      if (k == 1) return Bunch::mult_unit();
      return Bunch::leaf(formula(uniform(1, leaf_formula_size)));
    }
    int l = 1 + 2 * uniform(0, (size - 3) / 2);
    return Bunch::node(coin() ? BKind::Semi : BKind::Comma, bunch(l, leaf_formula_size),
                       bunch(size - 1 - l, leaf_formula_size));
  }

  Sequent sequent(int bunch_size, int leaf_formula_size, int goal_size) {
    return Sequent::make(bunch(bunch_size, leaf_formula_size), formula(goal_size));
  }

 private:
  std::mt19937 rng_;
  std::vector<std::string> atoms_;
};

}  // namespace bi::testing
