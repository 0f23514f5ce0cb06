// Kripke resource semantics: frames, partially commutative monoids, countermodels.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bi/syntax.hpp"

namespace bi {

// Worlds are 0..n-1. R(x, y, z) reads "x is a composition of y and z".
struct Frame {
  int n = 1;
  int e = 0;
  int pi = 0;
  std::vector<char> leq;  // n*n, leq[x*n+y] iff x <= y
  std::vector<char> rel;  // n*n*n

  bool le(int x, int y) const { return leq[static_cast<std::size_t>(x * n + y)] != 0; }
  bool R(int x, int y, int z) const { return rel[static_cast<std::size_t>((x * n + y) * n + z)] != 0; }
};

struct Check {
  bool ok = true;
  std::string message;
  explicit operator bool() const { return ok; }
};

// Preorder with pi on top, unitality, commutativity, associativity.
Check check_frame(const Frame& f);

// Total commutative monoid with a compatible preorder; pi absorbing and on top.
struct PCM {
  int n = 1;
  int e = 0;
  int pi = 0;
  std::vector<int> op;    // n*n
  std::vector<char> leq;  // n*n

  int mul(int x, int y) const { return op[static_cast<std::size_t>(x * n + y)]; }
  bool le(int x, int y) const { return leq[static_cast<std::size_t>(x * n + y)] != 0; }
};

Check check_pcm(const PCM& m);
Frame pcm_to_frame(const PCM& m);

struct Model {
  Frame frame;
  std::map<std::string, std::vector<char>> interp;  // atom -> worlds where it holds
  std::optional<PCM> pcm;                           // set when built from a monoid
};

// Extension of a formula: ext[w] iff w satisfies it. Memoized per evaluator.
class Evaluator {
 public:
  explicit Evaluator(const Model& m) : m_(m) {}
  const std::vector<char>& ext(const Formula& f);
  bool satisfies(int w, const Formula& f) { return ext(f)[static_cast<std::size_t>(w)] != 0; }

 private:
  const Model& m_;
  std::map<Formula, std::vector<char>> memo_;
};

bool satisfies(const Model& m, int w, const Formula& f);

// Frame laws, plus persistence and absurdity of pi for every formula in the subformula closure.
Check check_model(const Model& m, const std::vector<Formula>& formulas);
Check check_model(const Model& m, const Sequent& s);

// A world forcing the compacted context but not the extract, if any.
std::optional<int> refute(const Model& m, const Sequent& s);
bool valid_in(const Model& m, const Sequent& s);

// Valid monoids of size <= max_size in canonical order (e = 0, pi = n - 1), with pi the
// unique maximum: a world above pi would have to force F by persistence.
std::vector<PCM> enumerate_pcms(int max_size);

struct Countermodel {
  Model model;
  int world;
};

// First monoid model (canonical order) refuting s; interpretations are persistent and hold at pi.
std::optional<Countermodel> countermodel(const Sequent& s, int max_size = 4);

// Persistent interpretations of one atom: up-closed world sets containing pi, in canonical order.
std::vector<std::vector<char>> persistent_sets(const PCM& m);

Model model_of(const PCM& m, std::map<std::string, std::vector<char>> interp);

nlohmann::json model_to_json(const Model& m);
Model model_from_json(const nlohmann::json& j);  // throws std::runtime_error

}  // namespace bi
