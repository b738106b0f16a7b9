#include "causal/trace.hpp"
#include "doctest.h"
#include "semantics.hpp"

using namespace causal;

namespace {

Formula at(const std::string& l, bool primed = false) { return location_is("loc_P", l, primed); }

Valuation st(const char* loc, int x) { return {{"loc_P", std::string(loc)}, {"x", std::int64_t{x}}}; }

// a b c a
Computation abca() { return {{st("a", 0), st("b", 1), st("c", 2), st("a", 3)}, std::nullopt}; }

}  // namespace

TEST_CASE("traces keep a canonical order") {
  ConcurrentTrace t;
  t.add_event({"z", at("a"), ""});
  t.add_event({"m", at("b"), ""});
  t.add_link("z", "m");
  t.add_link("z", "m", at("c"));  // merges into the existing link
  CHECK(t.events().front().id == "m");
  CHECK(t.links().size() == 1);
  CHECK(to_string(t.links().front().label) == "loc_P = c");
  CHECK_THROWS_AS(t.add_link("z", "nope"), TraceError);
  CHECK_THROWS_AS(t.add_conflict("nope", "m"), TraceError);
  t.add_conflict("m", "z");
  CHECK(t.in_conflict("z", "m"));
  CHECK(t.has_path("z", "m"));
  CHECK_FALSE(t.has_path("m", "z"));
  CHECK(to_string(t) == "z[loc_P = a]; m[loc_P = b]; z ->[loc_P = c] m; m # z");
  t.add_event({"m", at("c"), "step"});  // replaces
  CHECK(t.events().size() == 2);
  CHECK(t.event("m").transition == "step");
  CHECK(to_string(ConcurrentTrace{}) == "empty");
}

TEST_CASE("well-formedness rejects link cycles") {
  ConcurrentTrace t;
  t.add_event({"a", {}, ""});
  t.add_event({"b", {}, ""});
  t.add_link("a", "b");
  CHECK(well_formed(t));
  t.add_link("b", "a");
  std::vector<std::string> why;
  CHECK_FALSE(well_formed(t, &why));
  CHECK_FALSE(why.empty());
}

TEST_CASE("topological order breaks ties by id") {
  ConcurrentTrace t;
  for (auto id : {"d", "c", "b", "a"}) t.add_event({id, {}, ""});
  t.add_link("d", "a");
  t.add_link("c", "b");
  CHECK(topological_events(t) == std::vector<std::string>{"c", "b", "d", "a"});
}

TEST_CASE("membership: labels, order, preservation, conflicts") {
  const auto c = abca();  // steps: a->b, b->c, c->a
  ConcurrentTrace t;
  t.add_event({"u", at("a"), ""});
  t.add_event({"v", at("a", true), ""});
  CHECK(is_member(c, t));  // u at 0, v at 2
  t.add_link("v", "u");
  CHECK_FALSE(is_member(c, t));  // v only at step 2, u only at step 0

  ConcurrentTrace p;
  p.add_event({"u", at("a"), ""});
  p.add_event({"w", at("c"), ""});
  p.add_link("u", "w", at("b"));  // step 1 lies between and starts in b
  CHECK(is_member(c, p));
  p.add_link("u", "w", compare(LinearExpr::variable({"x"}), Cmp::Ge, LinearExpr::number(2)));
  CHECK_FALSE(is_member(c, p));

  ConcurrentTrace q;
  q.add_event({"s", {}, ""});
  q.add_event({"r", at("c"), ""});
  q.add_conflict("s", "r");
  CHECK(is_member(c, q));
  Computation one{{st("c", 0), st("c", 0)}, std::nullopt};
  CHECK_FALSE(is_member(one, q));  // a single step cannot host both
  q.set_contradictory();  // a claim about system runs, not about labels
  CHECK(is_member(c, q));
}

TEST_CASE("membership agrees with the reference evaluator") {
  std::mt19937 rng(2024);
  int members = 0;
  for (int i = 0; i < 3000; ++i) {
    auto t = reference::random_trace(rng, 4);
    auto c = reference::random_computation(rng, 6);
    const bool expected = reference::member(c, t);
    members += expected;
    REQUIRE(is_member(c, t) == expected);
  }
  CHECK(members > 100);
}

TEST_CASE("lasso membership unrolls the loop") {
  // a -> b -> a -> b ... with the loop back to state 0.
  Computation c{{st("a", 0), st("b", 0)}, 0};
  InfiniteTrace t;
  t.cycle.add_event({"e", at("b"), ""});
  CHECK(is_member_lasso(c, t));
  t.invariant = compare(LinearExpr::variable({"x"}), Cmp::Eq, LinearExpr::number(0));
  CHECK(is_member_lasso(c, t));
  t.invariant = at("a");
  CHECK_FALSE(is_member_lasso(c, t));

  InfiniteTrace never;
  never.cycle.add_event({"e", at("c"), ""});
  CHECK_FALSE(is_member_lasso(c, never));
  CHECK(to_string(t) == "empty ( e[loc_P = b] | always[loc_P = a] )^w");
}

TEST_CASE("embedding maps events injectively under label implication") {
  ConcurrentTrace small, big;
  small.add_event({"p", at("a"), ""});
  small.add_event({"q", {}, ""});
  small.add_link("p", "q");
  big.add_event({"x", conj(at("a"), at("b", true)), ""});
  big.add_event({"y", at("c"), ""});
  big.add_event({"z", {}, ""});
  big.add_link("x", "y");
  big.add_link("y", "z");
  auto m = embed(small, big, reference::small_signature());
  REQUIRE(m);
  CHECK(m->at("p") == "x");

  // x and y have incompatible labels, so x is strictly before z as well.
  small.add_conflict("p", "q");
  CHECK(embed(small, big, reference::small_signature()));
  ConcurrentTrace loose;
  loose.add_event({"x", at("a"), ""});
  loose.add_event({"z", {}, ""});
  loose.add_link("x", "z");
  CHECK_FALSE(embed(small, loose, reference::small_signature()));
  loose.add_conflict("x", "z");
  CHECK(embed(small, loose, reference::small_signature()));
  ConcurrentTrace none;
  none.add_event({"p", at("b"), ""});
  CHECK_FALSE(embed(none, big, reference::small_signature()));
}

TEST_CASE("embedding is sound for membership") {
  std::mt19937 rng(99);
  const auto sig = reference::small_signature();
  int embedded = 0;
  for (int i = 0; i < 4000 && embedded < 200; ++i) {
    auto small = reference::random_trace(rng, 2);
    auto big = reference::random_trace(rng, 4);
    if (!embed(small, big, sig)) continue;
    ++embedded;
    for (int j = 0; j < 20; ++j) {
      auto c = reference::random_computation(rng, 6);
      if (reference::member(c, big)) REQUIRE(reference::member(c, small));
    }
  }
  CHECK(embedded >= 50);
}
