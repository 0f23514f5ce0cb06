#include <doctest.h>

#include <algorithm>

#include "bi/vbi.hpp"
#include "support.hpp"

using namespace bi;

namespace {

Sequent S(const std::string& s) { return parse_sequent(s); }

const VAlternative* find_rule(const std::vector<VAlternative>& alts, RuleId r) {
  for (const auto& a : alts)
    if (a.alt.rule == r) return &a;
  return nullptr;
}

}  // namespace

TEST_SUITE("vbi") {
  TEST_CASE("states translate back to their sequent") {
    testing::Gen g(61);
    for (int i = 0; i < 200; ++i) {
      Sequent s = g.sequent(g.uniform(1, 9), 3, g.uniform(1, 5));
      VState v = VState::of(s, "u");
      CHECK(v.sequent() == s);
      CHECK(v.world == "u");
      CHECK(same_multiset(v.bvs(), embed(s, "u")));
    }
  }

  TEST_CASE("vbi_reduce: worked examples") {
    auto conj = vbi_reduce(VState::of(S("p |- p /\\ p")));
    const VAlternative* a = find_rule(conj, RuleId::AndR);
    REQUIRE(a);
    REQUIRE(a->premisses.size() == 2);
    CHECK(a->premisses[0].sequent() == S("p |- p"));
    REQUIRE(a->fragment);
    CHECK(check_certificate(*a->fragment, true).ok);

    auto id = vbi_reduce(VState::of(S("p |- p")));
    CHECK(std::any_of(id.begin(), id.end(), [](const VAlternative& x) { return x.premisses.empty(); }));

    auto wand = vbi_reduce(VState::of(S("r |- p -* q")));
    const VAlternative* w = find_rule(wand, RuleId::WandR);
    REQUIRE(w);
    REQUIRE(w->premisses.size() == 1);
    CHECK(w->premisses[0].sequent() == normalize(S("r , p |- q")));
    CHECK(w->premisses[0].world != "w");  // the clause quantifies over a fresh world
    REQUIRE(w->fragment);
    CHECK(check_certificate(*w->fragment, true).ok);

    auto imp = vbi_reduce(VState::of(S("r |- p -> q")));
    const VAlternative* i = find_rule(imp, RuleId::ImpR);
    REQUIRE(i);
    CHECK(i->premisses[0].sequent() == normalize(S("r ; p |- q")));
  }

  TEST_CASE("vbi_reduce: premisses and certificates agree with the search table") {
    testing::Gen g(67);
    for (int k = 0; k < 60; ++k) {
      Sequent s = normalize(g.sequent(g.uniform(1, 6), 3, g.uniform(1, 4)));
      CAPTURE(s.str());
      VState v = VState::of(s);
      auto valts = vbi_reduce(v);
      auto salts = alternatives(s);
      REQUIRE(valts.size() == salts.size());
      for (std::size_t j = 0; j < valts.size(); ++j) {
        const VAlternative& va = valts[j];
        CHECK(va.alt.rule == salts[j].rule);
        REQUIRE(va.premisses.size() == va.alt.premisses.size());
        for (std::size_t i = 0; i < va.premisses.size(); ++i) CHECK(va.premisses[i].sequent() == va.alt.premisses[i]);
        REQUIRE(va.fragment);
        CHECK(same_multiset(va.fragment->seq, v.bvs()));
        CHECK(check_certificate(*va.fragment, true).ok);
        auto hs = va.fragment->hyps();
        REQUIRE(hs.size() == va.premisses.size());
        for (std::size_t i = 0; i < hs.size(); ++i) CHECK(same_multiset(hs[i]->seq, va.premisses[i].bvs()));
      }
    }
  }

  TEST_CASE("vbi_prove: worked examples") {
    VbiResult a = vbi_prove(S("p ; @a ; p -> q |- q"));
    REQUIRE(a.proved());
    REQUIRE(a.derivation);
    CHECK(check_certificate(*a.derivation).ok);
    CHECK(same_multiset(a.derivation->seq, embed(S("p ; @a ; p -> q |- q"))));
    CHECK(a.derivation->hyps().empty());

    CHECK(vbi_prove(S("p , q |- p * q")).proved());

    SearchPolicy deep;
    deep.depth = 12;
    VbiResult lem = vbi_prove(S("@m |- p \\/ (p -> F)"), deep);
    CHECK_FALSE(lem.proved());
    CHECK(lem.reason != Unproven::None);
  }

  TEST_CASE("vbi_prove mirrors prove on the corpus") {
    for (const std::string& t : testing::theorem_corpus()) {
      CAPTURE(t);
      ProveResult p = prove(S(t));
      VbiResult v = vbi_prove(S(t));
      REQUIRE(p.proved());
      REQUIRE(v.proved());
      CHECK(p.depth == v.depth);
      CHECK(isomorphic(*p.macro, *v.proof));
      REQUIRE(v.derivation);
      CHECK(check_certificate(*v.derivation).ok);
    }
  }

  TEST_CASE("certify: raw proofs become closed derivations") {
    for (const std::string& t : testing::theorem_corpus()) {
      CAPTURE(t);
      ProveResult p = prove(S(t));
      REQUIRE(p.proved());
      NameSupply ns;
      Certified c = certify(*p.proof, "w", ns);
      CHECK(c.hyps.empty());
      CHECK(check_certificate(c.derivation).ok);
      CHECK(same_multiset(c.derivation.seq, embed(S(t))));
    }
  }

  TEST_CASE("bisimulation on small sequents") {
    for (std::string t : {"p /\\ q |- q /\\ p", "p , q |- q * p", "p ; @a ; p -> q |- q", "r |- p -* q", "p |- q"}) {
      CAPTURE(t);
      BisimResult r = bisim_check(S(t), 3);
      CHECK(r.bisimilar());
      CHECK(r.unmatched() == 0);
      CHECK((r.matched() > 0) == (t != "p |- q"));  // an atom against another atom has no step
      CHECK_FALSE(r.capped);
      auto j = r.to_json();
      CHECK(j.dump() == bisim_check(S(t), 3).to_json().dump());
    }
  }

  TEST_CASE("spot-check rules: direct and meta-level computations agree") {
    testing::Gen g(71);
    for (int k = 0; k < 150; ++k) {
      Sequent s = g.sequent(g.uniform(1, 6), 3, g.uniform(1, 4));
      CAPTURE(s.str());
      for (RuleId r : spot_rules()) {
        auto d = spot_direct(r, s);
        auto m = spot_meta(r, s);
        for (auto* v : {&d, &m}) {
          for (auto& ps : *v) std::sort(ps.begin(), ps.end());
          std::sort(v->begin(), v->end());
        }
        CAPTURE(rule_name(r));
        CHECK(d == m);
      }
    }
    CHECK(spot_rules().size() == 5);
  }
}
