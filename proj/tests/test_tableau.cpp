#include "causal/corpus.hpp"
#include "causal/dsl.hpp"
#include "causal/report.hpp"
#include "causal/tableau.hpp"
#include "doctest.h"

using namespace causal;

namespace {

struct Solved {
  ComposedSystem sys;
  PropertySpec prop;
  Tableau tb;
  Verdict verdict;

  Solved(const std::string& model, const std::string& property, TableauOptions o = {})
      : sys(parse_model(model)), prop(parse_property(property, sys)), tb(sys, prop, o) {
    verdict = tb.run();
  }
};

TableauOptions with(Heuristic h) {
  TableauOptions o;
  o.heuristic = h;
  return o;
}

}  // namespace

TEST_CASE("roots encode the property") {
  ComposedSystem sys(parse_model(corpus::esparza(1)));
  auto roots = initial_roots(sys, parse_property(corpus::reach_c(), sys));
  REQUIRE(roots.size() == 1);
  CHECK(to_string(roots[0]) ==
        "init[loc_P0' = r1 & loc_P1' = s1]; "
        "target[loc_P0 = r2 & loc_P0' = r3 & loc_P1 = s2 & loc_P1' = s3]; "
        "init ->[true] target; init # target");
  auto term = initial_roots(sys, parse_property(corpus::termination(), sys));
  CHECK(to_string(term[0]) == "empty ( e[true] )^w");
}

TEST_CASE("the smart order needs seven nodes for every n") {
  for (int n = 1; n <= 10; ++n) {
    Solved s(corpus::esparza(n), corpus::reach_c(), with(Heuristic::Smart));
    INFO("n = " << n);
    CHECK(s.verdict.kind == VerdictKind::Proven);
    CHECK(s.verdict.reason == "all roots closed");
    CHECK(s.tb.nodes().size() == 7);
    CHECK(s.tb.proven());
  }
}

TEST_CASE("the naive order grows linearly") {
  for (int n = 1; n <= 10; ++n) {
    Solved s(corpus::esparza(n), corpus::reach_c(), with(Heuristic::Naive));
    INFO("n = " << n);
    CHECK(s.verdict.kind == VerdictKind::Proven);
    CHECK(s.tb.nodes().size() == static_cast<std::size_t>(n + 6));
  }
}

TEST_CASE("the two-process proof shape") {
  Solved s(corpus::esparza(2), corpus::reach_c());
  const auto& n = s.tb.nodes();
  auto rule = [&](int id) { return rule_name(n[id - 1].production->rule); };
  CHECK(rule(1) == "LastNecessaryEvent");
  CHECK(rule(2) == "LastNecessaryEvent");
  CHECK(rule(3) == "OrderSplit");
  CHECK(rule(4) == "LastNecessaryEvent");
  CHECK(n[3].production->params.at("interpolant") == "loc_P1 != s1");
  CHECK(n[3].production->params.at("pred") == "n2_e1");
  CHECK(n[5].status == NodeStatus::Contradictory);
  CHECK(n[6].status == NodeStatus::Contradictory);
  CHECK(n[0].production->params.at("interpolant") == "loc_P0 != r2");
}

TEST_CASE("budget exhaustion is reported") {
  TableauOptions o;
  o.max_nodes = 3;
  Solved s(corpus::esparza(3), corpus::reach_c(), o);
  CHECK(s.verdict.kind == VerdictKind::Unknown);
  CHECK(s.verdict.reason == "budget: node limit of 3 reached");
}

TEST_CASE("counterexamples are concrete runs") {
  Solved s(corpus::esparza(3, true), corpus::reach_c());
  REQUIRE(s.verdict.kind == VerdictKind::Violated);
  REQUIRE(s.verdict.witness);
  CHECK(validate_run(s.sys, *s.verdict.witness));
  CHECK(s.verdict.witness->transitions.back() == "c");

  Solved lock(corpus::lock(true), corpus::mutex());
  REQUIRE(lock.verdict.kind == VerdictKind::Violated);
  const auto& run = *lock.verdict.witness;
  CHECK(validate_run(lock.sys, run));
  bool both = false;
  Explorer ex(lock.sys);
  for (const auto& st : run.states) {
    auto v = ex.valuation(st);
    both = both || (std::get<std::string>(v.at("loc_P1")) == "crit" &&
                    std::get<std::string>(v.at("loc_P2")) == "crit");
  }
  CHECK(both);
}

TEST_CASE("non-termination yields a lasso") {
  Solved s(corpus::prodcons(1, 1, 1, 2, false, "nodec"), corpus::termination());
  REQUIRE(s.verdict.kind == VerdictKind::Violated);
  REQUIRE(s.verdict.witness);
  CHECK(s.verdict.witness->is_lasso());
  CHECK(validate_run(s.sys, *s.verdict.witness));
}

TEST_CASE("producer-consumer termination with ranking witnesses and coverings") {
  const std::size_t expected_nodes[] = {24, 55, 94};
  for (int k = 1; k <= 3; ++k) {
    Solved s(corpus::prodcons(k, k, k, 2), corpus::termination());
    INFO("k = " << k);
    REQUIRE(s.verdict.kind == VerdictKind::Proven);
    CHECK(s.tb.nodes().size() == expected_nodes[k - 1]);
    CHECK_FALSE(s.tb.coverings().empty());
    std::set<std::string> ranked;
    for (const auto& n : s.tb.nodes())
      if (n.production && n.production->rule == Rule::InvarianceSplit)
        ranked.insert(n.production->params.at("variable"));
    for (int i = 1; i <= k; ++i) {
      CHECK(ranked.count("p" + std::to_string(i)));
      CHECK(ranked.count("q" + std::to_string(i)));
    }
  }
  Solved two_queues(corpus::prodcons(1, 1, 2, 2, true, "prodcons_1_1_q2"), corpus::termination());
  CHECK(two_queues.verdict.kind == VerdictKind::Proven);
  CHECK(two_queues.tb.nodes().size() == 27);
}

TEST_CASE("the correct lock is out of reach of the rules") {
  // Mutual exclusion needs an invariant tying `lock` to both locations,
  // which no single-atom boundary expresses.
  Solved s(corpus::lock(false), corpus::mutex());
  CHECK(s.verdict.kind == VerdictKind::Unknown);
  CHECK(s.verdict.reason.rfind("rule-gap: ", 0) == 0);
}

TEST_CASE("identical runs give identical reports") {
  auto report = [] {
    Solved s(corpus::prodcons(2, 2, 2, 2), corpus::termination());
    ReportSources src{render_model(s.sys.system()), render_property(s.prop, s.sys)};
    return to_json(s.tb, s.verdict, src, false).dump() + export_dot(s.tb);
  };
  CHECK(report() == report());
}

TEST_CASE("default horizon") {
  ComposedSystem sys(parse_model(corpus::esparza(2)));
  auto roots = initial_roots(sys, parse_property(corpus::reach_c(), sys));
  CHECK(default_horizon(sys, roots[0]) == 3 * 2 * 3);
  auto run = realize_counterexample(sys, roots[0], 18);
  CHECK_FALSE(run);
}
