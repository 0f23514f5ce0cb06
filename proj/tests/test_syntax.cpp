#include <doctest.h>

#include <map>

#include "bi/syntax.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace bi;

namespace {
Bunch B(const std::string& s) { return parse_bunch(s); }
Formula Fm(const std::string& s) { return parse_formula(s); }
Bunch leaf(const std::string& a) { return Bunch::leaf(Formula::atom(a)); }
}  // namespace

TEST_SUITE("syntax") {
  TEST_CASE("parse: worked examples") {
    Sequent s = parse_sequent("p ; @a ; p -> q |- q");
    Bunch want = Bunch::semi(Bunch::semi(leaf("p"), Bunch::add_unit()),
                             Bunch::leaf(Formula::imp(Formula::atom("p"), Formula::atom("q"))));
    CHECK(s.ctx() == want);
    CHECK(s.goal() == Formula::atom("q"));

    Sequent u = parse_sequent("@m |- I");
    CHECK(u.ctx() == Bunch::mult_unit());
    CHECK(u.goal() == Formula::mtop());

    Sequent t = parse_sequent("p , q |- p * q");
    CHECK(t.ctx() == Bunch::comma(leaf("p"), leaf("q")));
    CHECK(t.goal() == Formula::star(Formula::atom("p"), Formula::atom("q")));

    CHECK(parse_sequent("|-").is_box());
    CHECK(parse_sequent("  |-  ").is_box());
  }

  TEST_CASE("parse: precedence and associativity") {
    CHECK(Fm("p * q /\\ r") == Formula::conj(Formula::star(Fm("p"), Fm("q")), Fm("r")));
    CHECK(Fm("p /\\ q \\/ r") == Formula::disj(Fm("p /\\ q"), Fm("r")));
    CHECK(Fm("p -> q -* r") == Formula::imp(Fm("p"), Formula::wand(Fm("q"), Fm("r"))));
    CHECK(Fm("p \\/ q -> r") == Formula::imp(Fm("p \\/ q"), Fm("r")));
    CHECK(Fm("p \\/ q \\/ r") == Formula::disj(Fm("p \\/ q"), Fm("r")));
    CHECK(Fm("T") == Formula::top());
    CHECK(Fm("F") == Formula::bottom());
    CHECK(Fm("I") == Formula::mtop());
    CHECK(B("p ; q ; r") == Bunch::semi(Bunch::semi(leaf("p"), leaf("q")), leaf("r")));
    CHECK(B("p , (q ; r)") == Bunch::comma(leaf("p"), Bunch::semi(leaf("q"), leaf("r"))));
    CHECK(Fm("x_1A") == Formula::atom("x_1A"));
  }

  TEST_CASE("parse: errors carry positions") {
    for (const char* bad : {"", "p |-", "|- p", "p & q |- p", "p ; q , r |- p", "(p |- p", "p |- q |- r", "P |- p",
                            "p -> |- p"}) {
      CAPTURE(bad);
      CHECK_THROWS_AS(parse_sequent(bad), ParseError);
    }
    try {
      parse_sequent("p |- q )");
      FAIL("accepted trailing junk");
    } catch (const ParseError& e) {
      CHECK(e.line == 1);
      CHECK(e.column == 8);
    }
    try {
      parse_sequent("p ;\n  q ,");
      FAIL("accepted a dangling former");
    } catch (const ParseError& e) {
      CHECK(e.line == 2);
    }
  }

  TEST_CASE("print/parse fixpoint on random sequents") {
    testing::Gen g(11);
    for (int i = 0; i < 500; ++i) {
      Sequent s = g.sequent(g.uniform(1, 11), 5, g.uniform(1, 7));
      CAPTURE(s.str());
      Sequent t = parse_sequent(s.str());
      CHECK(t == s);
      CHECK(t.str() == s.str());
    }
    CHECK(parse_sequent(Sequent::box().str()).is_box());
  }

  TEST_CASE("normalize: examples and idempotence") {
    CHECK(normalize(B("p ; @a ; q")) == B("p ; q"));
    CHECK(normalize(B("q , p")) == B("p , q"));
    CHECK(normalize(leaf("p")) == leaf("p"));
    CHECK(normalize(B("@a ; @a")) == Bunch::add_unit());
    CHECK(normalize(B("@m , @a")) == Bunch::add_unit());
    CHECK(normalize(B("r , (q , p)")) == B("p , q , r"));
    testing::Gen g(3);
    for (int i = 0; i < 400; ++i) {
      Bunch b = g.bunch(g.uniform(1, 15), 3);
      CAPTURE(b.str());
      CHECK(normalize(normalize(b)) == normalize(b));
      CHECK(equiv(b, normalize(b)));
    }
  }

  TEST_CASE("equiv: examples") {
    CHECK(equiv(B("p , q"), B("q , p")));
    CHECK_FALSE(equiv(B("p ; q"), B("p , q")));
    CHECK(equiv(B("p , @m"), B("p")));
    CHECK_FALSE(equiv(B("p , @a"), B("p")));
    CHECK(equiv(B("(p ; q) , r"), B("r , (q ; p)")));
  }

  TEST_CASE("equiv agrees with the rewrite closure oracle on small bunches") {
    // Smaller than the acceptance run: 1 atom, up to 5 nodes.
    const std::vector<Bunch> all = testing::all_bunches(5, {leaf("p"), Bunch::add_unit(), Bunch::mult_unit()});
    std::map<Bunch, std::set<Bunch>> closure;
    for (const Bunch& b : all) closure[b] = testing::rewrite_closure(b, 7);
    std::size_t disagreements = 0;
    for (const Bunch& a : all)
      for (const Bunch& b : all)
        if (equiv(a, b) != (closure[a].count(b) > 0)) ++disagreements;
    CHECK(disagreements == 0);
  }

  TEST_CASE("equiv is a congruence") {
    testing::Gen g(5);
    for (int i = 0; i < 200; ++i) {
      Bunch host = g.bunch(g.uniform(3, 9));
      auto pos = subbunch_positions(host);
      const BunchPath& p = pos[static_cast<std::size_t>(g.uniform(0, static_cast<int>(pos.size()) - 1))];
      Bunch d = g.bunch(g.uniform(1, 7));
      Bunch d2 = normalize(Bunch::comma(Bunch::mult_unit(), d));
      CHECK(equiv(replace(host, p, d), replace(host, p, d2)));
    }
  }

  TEST_CASE("subbunch_positions and replace") {
    auto one = subbunch_positions(leaf("p"));
    REQUIRE(one.size() == 1);
    CHECK(one[0].empty());
    auto two = subbunch_positions(B("p ; q"));
    REQUIRE(two.size() == 3);
    CHECK(path_str(two[1]) == "L");
    CHECK(path_str(two[2]) == "R");
    CHECK(subbunch_positions(B("(p ; q) , r")).size() == 5);
    CHECK(path_str(subbunch_positions(B("(p ; q) , r"))[2]) == "LL");

    CHECK(replace(B("p ; q"), parse_path("R"), leaf("r")) == B("p ; r"));
    CHECK(replace(B("p ; q"), parse_path("e"), leaf("r")) == leaf("r"));
    CHECK(replace(B("p , q"), parse_path("L"), B("r ; s")) == B("(r ; s) , q"));
    CHECK_THROWS_AS(replace(B("p , q"), parse_path("LL"), leaf("r")), std::out_of_range);

    testing::Gen g(9);
    for (int i = 0; i < 100; ++i) {
      Bunch b = g.bunch(g.uniform(1, 13));
      for (const BunchPath& p : subbunch_positions(b)) CHECK(replace(b, p, b.at(p)) == b);
    }
  }

  TEST_CASE("compact") {
    CHECK(compact(B("p , (q ; r)")) == Fm("p * (q /\\ r)"));
    CHECK(compact(Bunch::mult_unit()) == Formula::mtop());
    CHECK(compact(Bunch::add_unit()) == Formula::top());
    CHECK(compact(leaf("p")) == Fm("p"));
  }

  TEST_CASE("flatten and build") {
    Bunch b = B("p , (q , r) , s");
    auto xs = flatten(b, BKind::Comma);
    REQUIRE(xs.size() == 4);
    CHECK(build(BKind::Comma, xs) == B("p , q , r , s"));
    CHECK(flatten(B("p ; q"), BKind::Comma).size() == 1);
  }
}
