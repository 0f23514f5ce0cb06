#include <doctest.h>

#include "bi/search.hpp"
#include "bi/semantics.hpp"
#include "support.hpp"

using namespace bi;

namespace {

Sequent S(const std::string& s) { return parse_sequent(s); }
Formula Fm(const std::string& s) { return parse_formula(s); }

PCM make_pcm(int n, std::vector<int> op, std::vector<std::pair<int, int>> extra_leq = {}) {
  PCM m;
  m.n = n;
  m.e = 0;
  m.pi = n - 1;
  m.op = std::move(op);
  m.leq.assign(static_cast<std::size_t>(n * n), 0);
  for (int x = 0; x < n; ++x) {
    m.leq[static_cast<std::size_t>(x * n + x)] = 1;
    m.leq[static_cast<std::size_t>(x * n + n - 1)] = 1;
  }
  for (auto [x, y] : extra_leq) m.leq[static_cast<std::size_t>(x * n + y)] = 1;
  return m;
}

// Monoid laws and order compatibility, stated directly.
bool lawful(int n, const std::vector<int>& op, const std::vector<char>& le) {
  auto mul = [&](int x, int y) { return op[static_cast<std::size_t>(x * n + y)]; };
  auto L = [&](int x, int y) { return le[static_cast<std::size_t>(x * n + y)] != 0; };
  const int e = 0, pi = n - 1;
  for (int x = 0; x < n; ++x) {
    if (mul(e, x) != x || mul(x, e) != x || mul(pi, x) != pi || !L(x, x) || !L(x, pi)) return false;
    if (x != pi && L(pi, x)) return false;  // pi is the unique maximum
    for (int y = 0; y < n; ++y) {
      if (mul(x, y) != mul(y, x)) return false;
      for (int z = 0; z < n; ++z) {
        if (mul(mul(x, y), z) != mul(x, mul(y, z))) return false;
        if (L(x, y) && L(y, z) && !L(x, z)) return false;
        if (L(x, y) && !L(mul(x, z), mul(y, z))) return false;
      }
    }
  }
  return true;
}

// Number of lawful (product, preorder) pairs with e = 0 and pi = n - 1 (n = 1: e = pi).
std::size_t brute_count(int n) {
  std::size_t count = 0;
  const std::size_t cells = static_cast<std::size_t>(n * n);
  std::vector<int> op(cells, 0);
  std::size_t tables = 1;
  for (std::size_t i = 0; i < cells; ++i) tables *= static_cast<std::size_t>(n);
  for (std::size_t t = 0; t < tables; ++t) {
    std::size_t k = t;
    for (std::size_t i = 0; i < cells; ++i) {
      op[i] = static_cast<int>(k % static_cast<std::size_t>(n));
      k /= static_cast<std::size_t>(n);
    }
    std::vector<char> top(cells, 0);
    for (int x = 0; x < n; ++x) top[static_cast<std::size_t>(x * n + n - 1)] = top[static_cast<std::size_t>(x * n + x)] = 1;
    if (!lawful(n, op, top)) continue;  // the discrete order below pi is compatible with any lawful product
    for (std::size_t r = 0; r < (std::size_t{1} << cells); ++r) {
      std::vector<char> le(cells);
      for (std::size_t i = 0; i < cells; ++i) le[i] = static_cast<char>((r >> i) & 1u);
      if (lawful(n, op, le)) ++count;
    }
  }
  return count;
}

}  // namespace

TEST_SUITE("semantics") {
  TEST_CASE("check_frame") {
    PCM one = make_pcm(1, {0});
    REQUIRE(check_pcm(one).ok);
    Frame f1 = pcm_to_frame(one);
    CHECK(check_frame(f1).ok);
    CHECK(f1.rel == std::vector<char>{1});

    Frame broken = f1;
    broken.rel[0] = 0;
    Check c = check_frame(broken);
    CHECK_FALSE(c.ok);
    CHECK(c.message.find("unitality") != std::string::npos);

    for (const PCM& m : enumerate_pcms(3)) CHECK(check_frame(pcm_to_frame(m)).ok);
  }

  TEST_CASE("pcm_to_frame on explicit tables") {
    // {e, a, pi} with a.a = pi, pi absorbing, discrete order plus x <= pi.
    PCM m3 = make_pcm(3, {0, 1, 2, 1, 2, 2, 2, 2, 2});
    REQUIRE(check_pcm(m3).ok);
    Frame f3 = pcm_to_frame(m3);
    CHECK(f3.n == 3);
    CHECK(check_frame(f3).ok);
    CHECK(f3.R(2, 1, 1));
    CHECK_FALSE(f3.R(1, 1, 1));

    // One generator truncated at four elements: e, a, a.a, pi with a.(a.a) = pi.
    std::vector<int> op(16);
    for (int x = 0; x < 4; ++x)
      for (int y = 0; y < 4; ++y) op[static_cast<std::size_t>(x * 4 + y)] = (x == 3 || y == 3) ? 3 : std::min(x + y, 3);
    PCM m4 = make_pcm(4, op);
    REQUIRE(check_pcm(m4).ok);
    Frame f4 = pcm_to_frame(m4);
    CHECK(f4.n == 4);
    CHECK(check_frame(f4).ok);

    PCM bad = make_pcm(2, {0, 1, 1, 0});
    CHECK_FALSE(check_pcm(bad).ok);
  }

  TEST_CASE("enumerate_pcms agrees with a brute-force count") {
    for (int n = 1; n <= 3; ++n) {
      std::size_t all = enumerate_pcms(n).size();
      std::size_t below = n > 1 ? enumerate_pcms(n - 1).size() : 0;
      CAPTURE(n);
      CHECK(all - below == brute_count(n));
    }
    for (const PCM& m : enumerate_pcms(4)) {
      CHECK(check_pcm(m).ok);
      CHECK(m.e == 0);
      CHECK(m.pi == m.n - 1);
    }
  }

  TEST_CASE("satisfaction clauses") {
    for (const PCM& p : enumerate_pcms(3)) {
      for (const auto& ip : persistent_sets(p)) {
        Model m = model_of(p, {{"p", ip}});
        for (int w = 0; w < p.n; ++w) CHECK(satisfies(m, w, Formula::top()));
        CHECK(satisfies(m, p.pi, Formula::bottom()));
        for (int w = 0; w < p.n; ++w) {
          CHECK(satisfies(m, w, Formula::mtop()) == p.le(p.e, w));
          CHECK(satisfies(m, w, Formula::bottom()) == (w == p.pi));
          CHECK(satisfies(m, w, compact(parse_bunch("p ; @a"))) == satisfies(m, w, Fm("p")));
        }
      }
    }
    PCM one = make_pcm(1, {0});
    Model m = model_of(one, {{"p", {1}}});
    CHECK(satisfies(m, 0, Fm("p * p")));
    CHECK(valid_in(m, S("p , p |- p * p")));
  }

  TEST_CASE("check_model") {
    PCM one = make_pcm(1, {0});
    Model deg = model_of(one, {{"p", {1}}, {"q", {1}}});
    CHECK(check_model(deg, std::vector<Formula>{Fm("p /\\ q")}).ok);

    PCM m3 = make_pcm(3, {0, 1, 2, 1, 2, 2, 2, 2, 2}, {{0, 1}});
    REQUIRE(check_pcm(m3).ok);
    Model np = model_of(m3, {{"p", {1, 0, 1}}});  // holds at e but not at a although e <= a
    CHECK_FALSE(check_model(np, std::vector<Formula>{Fm("p")}).ok);
    Model nopi = model_of(m3, {{"p", {0, 1, 0}}});
    CHECK_FALSE(check_model(nopi, std::vector<Formula>{Fm("p")}).ok);

    testing::Gen g(47);
    for (const PCM& p : enumerate_pcms(3))
      for (const auto& ip : persistent_sets(p))
        for (const auto& iq : persistent_sets(p)) {
          Model m = model_of(p, {{"p", ip}, {"q", iq}, {"r", ip}});
          for (const std::string& t : testing::theorem_corpus()) CHECK(check_model(m, S(t)).ok);
          for (int i = 0; i < 3; ++i) CHECK(check_model(m, std::vector<Formula>{g.formula(9)}).ok);
        }
  }

  TEST_CASE("valid_in") {
    for (const PCM& p : enumerate_pcms(3))
      for (const auto& ip : persistent_sets(p)) {
        Model m = model_of(p, {{"p", ip}, {"q", ip}});
        CHECK(valid_in(m, S("p |- p")));
        CHECK(valid_in(m, S("(p , q) ; @a |- T")));
      }
  }

  TEST_CASE("countermodel: examples and witness checks") {
    auto pq = countermodel(S("p /\\ q |- p * q"), 4);
    REQUIRE(pq.has_value());
    CHECK(pq->model.frame.n <= 4);
    const int w = pq->world;
    CHECK(satisfies(pq->model, w, Fm("p")));
    CHECK(satisfies(pq->model, w, Fm("q")));
    CHECK_FALSE(satisfies(pq->model, w, Fm("p * q")));
    CHECK_FALSE(valid_in(pq->model, S("p /\\ q |- p * q")));

    CHECK_FALSE(countermodel(S("p |- p"), 4).has_value());
    CHECK(countermodel(S("@m |- p \\/ (p -> F)"), 4).has_value());
  }

  TEST_CASE("countermodels pass check_model and refute at their witness") {
    for (const std::string& t : testing::non_theorem_corpus()) {
      if (t == testing::kFixture) continue;
      CAPTURE(t);
      auto cm = countermodel(S(t), 4);
      REQUIRE(cm.has_value());
      CHECK(check_model(cm->model, S(t)).ok);
      CHECK(check_frame(cm->model.frame).ok);
      CHECK(refute(cm->model, S(t)) == cm->world);
    }
  }

  TEST_CASE("fixture: components valid and provable, the combination has no small countermodel") {
    for (const char* f : {"@m |- T", "@m |- T -* T", "@m |- T * (T -* T)"}) {
      CAPTURE(f);
      CHECK(prove(S(f)).proved());
      CHECK_FALSE(countermodel(S(f), 3).has_value());
    }
    CHECK_FALSE(countermodel(S(testing::kFixture), 3).has_value());
  }

  TEST_CASE("soundness sampling on the corpus") {
    std::vector<Model> models;
    for (const PCM& p : enumerate_pcms(3)) {
      auto sets = persistent_sets(p);
      for (const auto& a : sets)
        for (const auto& b : sets) models.push_back(model_of(p, {{"p", a}, {"q", b}, {"r", a}}));
    }
    for (const std::string& t : testing::theorem_corpus()) {
      CAPTURE(t);
      REQUIRE(prove(S(t)).proved());
      for (const Model& m : models) CHECK(valid_in(m, S(t)));
    }
  }

  TEST_CASE("model JSON round-trip and errors") {
    auto cm = countermodel(S("p * q |- p /\\ q"), 4);
    REQUIRE(cm.has_value());
    auto j = model_to_json(cm->model);
    Model back = model_from_json(nlohmann::json::parse(j.dump()));
    CHECK(model_to_json(back) == j);
    CHECK(refute(back, S("p * q |- p /\\ q")) == cm->world);

    // Relational form with world names.
    auto rel = nlohmann::json::parse(R"({"worlds":["e"],"e":"e","pi":"e","leq":[["e","e"]],"R":[["e","e","e"]],
                                         "interp":{"p":["e"]}})");
    Model r = model_from_json(rel);
    CHECK(check_frame(r.frame).ok);
    CHECK(valid_in(r, S("p , p |- p * p")));

    CHECK_THROWS_AS(model_from_json(nlohmann::json::parse(R"({"worlds":2})")), std::runtime_error);
    CHECK_THROWS_AS(model_from_json(nlohmann::json::parse(R"({"worlds":1,"e":3,"pi":0,"leq":[]})")),
                    std::runtime_error);
  }
}
