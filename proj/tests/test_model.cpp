#include "causal/corpus.hpp"
#include "causal/dsl.hpp"
#include "causal/model.hpp"
#include "doctest.h"

using namespace causal;

namespace {

TransitionSystem counter() {
  TransitionSystem s;
  s.name = "counter";
  s.integers.push_back({"x", 2, 0, 5});
  s.processes.push_back({"P", {"a", "b"}, "a"});
  LocalTransition t{"dec", "P", "a", "b", {}, {}};
  t.guard = compare(LinearExpr::variable({"x"}), Cmp::Gt, LinearExpr::number(0));
  LinearExpr e = LinearExpr::variable({"x"});
  e -= LinearExpr::number(1);
  t.updates.push_back({"x", e});
  s.locals.push_back(t);
  s.locals.push_back({"back", "P", "b", "a", {}, {}});
  return s;
}

}  // namespace

TEST_CASE("validation names the broken invariant") {
  CHECK_NOTHROW(validate(counter()));

  auto s = counter();
  s.processes.clear();
  CHECK_THROWS_WITH_AS(validate(s), doctest::Contains("no processes"), ModelError);

  s = counter();
  s.locals[1].target = "nowhere";
  CHECK_THROWS_AS(validate(s), ModelError);

  s = counter();
  s.locals[1].name = "dec";
  CHECK_THROWS_AS(validate(s), ModelError);

  s = counter();
  s.integers[0].initial = 9;
  CHECK_THROWS_AS(validate(s), ModelError);

  s = counter();
  s.locals[1].name = "init";
  CHECK_THROWS_AS(validate(s), ModelError);

  s = counter();
  s.syncs.push_back({"g", {"dec", "back"}});  // two members of one process
  CHECK_THROWS_AS(validate(s), ModelError);
}

TEST_CASE("free interleaving composes one global per local") {
  ComposedSystem sys(counter());
  REQUIRE(sys.transitions().size() == 2);
  CHECK(sys.transitions()[0].name == "dec");
  CHECK(to_string(sys.transitions()[0].relation) ==
        "loc_P = a & loc_P' = b & x' = x - 1 & x >= 1");
  CHECK(to_string(sys.transitions()[1].relation) == "loc_P = b & loc_P' = a & x' = x");
  CHECK(to_string(sys.init()) == "loc_P = a & x = 2");
  CHECK(sys.init_transition().name == "init");
  CHECK(to_string(sys.init_step()) == "loc_P = a & loc_P' = a & loc_P' = loc_P & x = 2 & x' = 2");
  CHECK(sys.signature().integers.count("x") == 1);
  CHECK(sys.signature().locations.at("loc_P") == std::vector<std::string>{"a", "b"});
}

TEST_CASE("the Esparza family composes into sync vectors") {
  for (int n = 1; n <= 6; ++n) {
    ComposedSystem sys(parse_model(corpus::esparza(n)));
    CHECK(sys.system().processes.size() == static_cast<std::size_t>(n + 1));
    CHECK(sys.transitions().size() == static_cast<std::size_t>(n + 2));
    const auto* c = sys.find("c");
    REQUIRE(c != nullptr);
    CHECK(c->members.size() == static_cast<std::size_t>(n + 1));
  }
  ComposedSystem two(parse_model(corpus::esparza(2)));
  CHECK(to_string(two.find("a")->relation) ==
        "loc_P0 = r1 & loc_P0' = r2 & loc_P1 = s1 & loc_P1' = s4 & loc_P2' = loc_P2");
}

TEST_CASE("a sync vector may not update a variable twice") {
  auto s = counter();
  s.processes.push_back({"Q", {"u"}, "u"});
  LocalTransition q{"inc", "Q", "u", "u", {}, {}};
  LinearExpr e = LinearExpr::variable({"x"});
  e += LinearExpr::number(1);
  q.updates.push_back({"x", e});
  s.locals.push_back(q);
  s.syncs = {{"both", {"dec", "inc"}}, {"b", {"back"}}};
  CHECK_THROWS_AS(ComposedSystem{s}, ModelError);
}

TEST_CASE("producer-consumer sizes") {
  CHECK(transition_count(parse_model(corpus::prodcons(1, 1, 2, 2, true, "prodcons_1_1_q2"))) == 8);
  CHECK(transition_count(parse_model(corpus::prodcons(2, 2, 2, 2))) == 16);
  CHECK(transition_count(parse_model(corpus::prodcons(5, 5, 5, 2))) == 5 * (2 + 5) + 5 * 4);
}
