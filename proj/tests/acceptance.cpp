// End-to-end acceptance run: one PASS/FAIL line per criterion, exit status 1
// if any criterion fails.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "causal/corpus.hpp"
#include "causal/dsl.hpp"
#include "causal/oracle.hpp"
#include "causal/report.hpp"
#include "causal/tableau.hpp"
#include "semantics.hpp"
#include "soundness.hpp"

using namespace causal;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& rel) {
  std::ifstream in(fs::path(CORPUS_DIR) / rel);
  if (!in) throw std::runtime_error("missing corpus file " + rel);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// A model and property loaded from the corpus and run to a verdict.
struct Case {
  std::string label;
  ComposedSystem sys;
  PropertySpec prop;
  Tableau tb;
  Verdict verdict;
  double secs = 0;

  Case(const std::string& model, const std::string& property, Heuristic h = Heuristic::Smart)
      : label(model),
        sys(parse_model(slurp(model))),
        prop(parse_property(slurp(property), sys)),
        tb(sys, prop, options(h)) {
    const auto t0 = std::chrono::steady_clock::now();
    verdict = tb.run();
    secs = seconds_since(t0);
  }

  static TableauOptions options(Heuristic h) {
    TableauOptions o;
    o.heuristic = h;
    return o;
  }
};

// Collects failures for one criterion; prints a single line at the end.
class Criterion {
 public:
  explicit Criterion(int n) : n_(n), start_(std::chrono::steady_clock::now()) {}

  void expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  void note(const std::string& s) { notes_.push_back(s); }

  bool report(const std::string& title) const {
    std::cout << (failures_.empty() ? "PASS" : "FAIL") << " criterion " << n_ << ": " << title;
    if (!notes_.empty()) {
      std::cout << " (";
      for (std::size_t i = 0; i < notes_.size(); ++i) std::cout << (i ? "; " : "") << notes_[i];
      std::cout << ")";
    }
    std::cout << " [" << static_cast<int>(seconds_since(start_) * 10) / 10.0 << " s]\n";
    for (const auto& f : failures_) std::cout << "    " << f << "\n";
    return failures_.empty();
  }

 private:
  int n_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

std::string esparza(int n) { return "esparza/esparza_n" + std::to_string(n) + ".sys"; }
std::string prodcons(int k) {
  return "prodcons/prodcons_" + std::to_string(k) + "_" + std::to_string(k) + ".sys";
}

std::set<std::string> ranked_variables(const Tableau& tb) {
  std::set<std::string> out;
  for (const auto& n : tb.nodes())
    if (n.production && n.production->rule == Rule::InvarianceSplit)
      out.insert(n.production->params.at("variable"));
  return out;
}

bool run_reaches(const ComposedSystem& sys, const Run& run, const Formula& goal) {
  Explorer ex(sys);
  for (const auto& st : run.states) {
    auto v = ex.valuation(st);
    if (eval(goal, v, v)) return true;
  }
  return false;
}

// Every tableau built for criteria 1-3, kept for the soundness and
// interpolation checks.
struct Built {
  std::string model, property;
  Heuristic heuristic;
};
std::vector<Built> built;

Case make(const std::string& model, const std::string& property, Heuristic h = Heuristic::Smart) {
  built.push_back({model, property, h});
  return Case(model, property, h);
}

bool criterion1() {
  Criterion c(1);
  double worst = 0;
  for (int n = 1; n <= 10; ++n) {
    const std::string tag = "n=" + std::to_string(n);
    Case smart = make(esparza(n), "esparza/reach_c.prop");
    Case naive = make(esparza(n), "esparza/reach_c.prop", Heuristic::Naive);
    c.expect(smart.verdict.kind == VerdictKind::Proven, tag + " smart not proven: " + smart.verdict.reason);
    c.expect(naive.verdict.kind == VerdictKind::Proven, tag + " naive not proven: " + naive.verdict.reason);
    c.expect(smart.tb.nodes().size() == 7,
             tag + " smart used " + std::to_string(smart.tb.nodes().size()) + " nodes");
    c.expect(naive.tb.nodes().size() <= static_cast<std::size_t>(n + 6),
             tag + " naive used " + std::to_string(naive.tb.nodes().size()) + " nodes");
    c.expect(smart.secs < 5 && naive.secs < 5, tag + " exceeded 5 s");
    worst = std::max({worst, smart.secs, naive.secs});
    if (n <= 8) {
      const std::size_t expected = 3u << (n - 1);
      c.expect(enumerate_reachable(smart.sys).size() == expected, tag + " oracle state count");
      c.expect(!check_reachability(smart.sys, ReachTarget::fires("c")), tag + " oracle reaches c");
    }
  }
  std::ostringstream os;
  os << "smart 7 nodes, naive n+6 nodes, slowest " << worst << " s";
  c.note(os.str());
  return c.report("Esparza family proven with constant and linear proof sizes");
}

bool criterion2() {
  Criterion c(2);
  std::ostringstream sizes;
  for (int k = 1; k <= 5; ++k) {
    const std::string tag = "k=" + std::to_string(k);
    Case pc = make(prodcons(k), "prodcons/term.prop");
    c.expect(pc.verdict.kind == VerdictKind::Proven, tag + " not proven: " + pc.verdict.reason);
    const auto ranked = ranked_variables(pc.tb);
    for (int i = 1; i <= k; ++i) {
      c.expect(ranked.count("p" + std::to_string(i)) == 1, tag + " no ranking on p" + std::to_string(i));
      c.expect(ranked.count("q" + std::to_string(i)) == 1, tag + " no ranking on q" + std::to_string(i));
    }
    c.expect(!pc.tb.coverings().empty(), tag + " has no coverings");
    c.expect(pc.tb.nodes().size() <= static_cast<std::size_t>(30 * k * k),
             tag + " used " + std::to_string(pc.tb.nodes().size()) + " nodes");
    if (k == 5) c.expect(pc.secs < 30, "k=5 exceeded 30 s");
    sizes << (k > 1 ? "/" : "") << pc.tb.nodes().size();
    if (k == 5) sizes << " nodes, k=5 in " << pc.secs << " s";
  }
  Case two_queues = make("prodcons/prodcons_1_1_q2.sys", "prodcons/term.prop");
  c.expect(two_queues.verdict.kind == VerdictKind::Proven, "prodcons_1_1_q2 not proven");
  c.expect(ranked_variables(two_queues.tb).count("p1") == 1, "prodcons_1_1_q2 no ranking on p1");

  // The explicit oracle must agree on every small instance.
  std::size_t largest = 0;
  for (int k = 1; k <= 3; ++k)
    for (int pool = 2; pool <= 3; ++pool) {
      const std::string tag = "k=" + std::to_string(k) + " pool=" + std::to_string(pool);
      ComposedSystem sys(parse_model(corpus::prodcons(k, k, k, pool)));
      if (pool == 2) largest = std::max(largest, enumerate_reachable(sys, 1u << 21).size());
      const bool terminates = !check_termination(sys, 1u << 21);
      Tableau tb(sys, parse_property(slurp("prodcons/term.prop"), sys));
      const auto v = tb.run();
      c.expect(terminates, tag + " oracle found a lasso");
      c.expect(v.kind == VerdictKind::Proven, tag + " tableau: " + v.reason);
    }
  Case nodec = make("prodcons/prodcons_1_1_nodec.sys", "prodcons/term.prop");
  c.expect(nodec.verdict.kind == VerdictKind::Violated && nodec.verdict.witness &&
               nodec.verdict.witness->is_lasso() && validate_run(nodec.sys, *nodec.verdict.witness),
           "non-decrementing variant not refuted by a valid lasso");
  c.expect(static_cast<bool>(check_termination(nodec.sys)), "oracle accepts the non-decrementing variant");
  c.note(sizes.str());
  c.note("oracle agrees for k <= 3, pool <= 3; " + std::to_string(largest) + " states at k=3, pool=2");
  return c.report("producer-consumer termination with ranking witnesses and coverings");
}

bool criterion3() {
  Criterion c(3);
  Case mutated = make("esparza/esparza_n3_mutated.sys", "esparza/reach_c.prop");
  c.expect(mutated.verdict.kind == VerdictKind::Violated, "mutated Esparza: " + mutated.verdict.reason);
  if (mutated.verdict.witness) {
    const auto& run = *mutated.verdict.witness;
    std::string why;
    c.expect(validate_run(mutated.sys, run, &why), "mutated witness invalid: " + why);
    c.expect(!run.transitions.empty() && run.transitions.back() == "c", "mutated witness does not fire c");
    c.expect(static_cast<bool>(check_reachability(mutated.sys, ReachTarget::fires("c"))),
             "oracle disagrees on the mutated model");
    std::string path;
    for (const auto& t : run.transitions) path += (path.empty() ? "" : " ") + t;
    c.note("witness " + path);
  } else {
    c.expect(false, "mutated Esparza has no witness");
  }

  Case lock = make("lock/lock_broken.sys", "lock/mutex.prop");
  const auto both = parse_formula("loc_P1 = crit & loc_P2 = crit", lock.sys.signature());
  c.expect(lock.verdict.kind == VerdictKind::Violated, "broken lock: " + lock.verdict.reason);
  if (lock.verdict.witness) {
    c.expect(validate_run(lock.sys, *lock.verdict.witness), "broken-lock witness invalid");
    c.expect(run_reaches(lock.sys, *lock.verdict.witness, both), "broken-lock witness misses C1 & C2");
    c.note("broken lock reaches C1 & C2 in " +
           std::to_string(lock.verdict.witness->transitions.size()) + " steps");
  } else {
    c.expect(false, "broken lock has no witness");
  }
  c.expect(static_cast<bool>(check_reachability(lock.sys, ReachTarget::holds(both))),
           "oracle disagrees on the broken lock");
  return c.report("counterexamples are concrete, oracle-validated runs");
}

bool criterion4() {
  Criterion c(4);
  std::size_t instances = 0, productions = 0, checks = 0;
  std::set<std::string> seen;
  for (const auto& b : built) {
    if (!seen.insert(b.model + "|" + b.property + "|" + heuristic_name(b.heuristic)).second) continue;
    Case k(b.model, b.property, b.heuristic);
    try {
      enumerate_reachable(k.sys, 10000);
    } catch (const OracleError&) {
      continue;  // too large to sample meaningfully
    }
    auto sample = soundness::sample(k.sys, 12, 2000, 5);
    auto r = soundness::check(k.tb, sample);
    ++instances;
    productions += r.productions;
    checks += r.checks;
    for (const auto& p : r.problems) c.expect(false, b.model + ": " + p);
  }
  c.expect(instances >= 20, "too few instances");
  c.note(std::to_string(instances) + " tableaux, " + std::to_string(productions) + " productions, " +
         std::to_string(checks) + " membership checks");
  return c.report("every production is sound on sampled system computations");
}

bool criterion5() {
  Criterion c(5);
  std::mt19937 rng(20240611);
  int members = 0, mismatches = 0;
  const int rounds = 12000;
  for (int i = 0; i < rounds; ++i) {
    auto t = reference::random_trace(rng, 5);
    auto comp = reference::random_computation(rng, 8);
    const bool expected = reference::member(comp, t);
    members += expected;
    if (is_member(comp, t) != expected) ++mismatches;
  }
  c.expect(mismatches == 0, std::to_string(mismatches) + " disagreements with the reference");
  c.expect(members > rounds / 50, "too few positive cases");
  c.note(std::to_string(rounds) + " comparisons, " + std::to_string(members) + " members");
  return c.report("membership agrees with brute-force evaluation");
}

bool criterion6() {
  Criterion c(6);
  std::size_t observed = 0, bad = 0;
  set_interpolation_observer([&](const Formula& a, const Formula& b, const Formula& itp) {
    ++observed;
    if (!is_interpolant(a, b, itp)) ++bad;
  });
  std::string node4_itp;
  std::set<std::string> seen;
  for (const auto& b : built) {
    if (!seen.insert(b.model + "|" + b.property + "|" + heuristic_name(b.heuristic)).second) continue;
    Case k(b.model, b.property, b.heuristic);
    if (b.model == esparza(2) && b.heuristic == Heuristic::Smart) {
      const auto& n4 = k.tb.node(4);
      if (n4.production && n4.production->params.count("interpolant"))
        node4_itp = n4.production->params.at("interpolant");
    }
  }
  set_interpolation_observer({});
  c.expect(observed > 0, "no interpolation observed");
  c.expect(bad == 0, std::to_string(bad) + " engine interpolants fail their postconditions");
  c.expect(node4_itp == "loc_P1 != s1", "Esparza n=2 node 4 interpolant is '" + node4_itp + "'");

  Signature sig;
  sig.integers = {"x", "y", "z"};
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> coef(-2, 2), bound(-3, 3), pick(0, 2);
  const char* names[] = {"x", "y", "z"};
  auto atom = [&](int bias) {
    LinearExpr e;
    for (int i = 0; i < 2; ++i)
      e += LinearExpr::variable({names[(pick(rng) + bias) % 3]}).scaled(coef(rng));
    Cmp op = pick(rng) == 0 ? Cmp::Eq : (pick(rng) == 0 ? Cmp::Ge : Cmp::Le);
    return compare(e, op, LinearExpr::number(bound(rng)));
  };
  int pairs = 0, invalid = 0, declined = 0;
  for (int round = 0; round < 100000 && pairs < 1000; ++round) {
    Formula a, b;
    for (int i = 0; i < 3; ++i) a = conj(a, atom(0));
    for (int i = 0; i < 3; ++i) b = conj(b, atom(1));
    if (is_satisfiable(conj(a, b), sig) || !is_satisfiable(a, sig) || !is_satisfiable(b, sig)) continue;
    ++pairs;
    try {
      if (!is_interpolant(a, b, interpolate(a, b, sig), sig)) ++invalid;
    } catch (const LogicError&) {
      ++declined;  // unsat only through divisibility; no linear interpolant exists
    }
  }
  c.expect(pairs == 1000, "only " + std::to_string(pairs) + " random unsat pairs");
  c.expect(invalid == 0, std::to_string(invalid) + " random interpolants invalid");
  c.expect(declined * 20 < pairs, std::to_string(declined) + " random pairs declined");
  c.note(std::to_string(observed) + " engine interpolants, " + std::to_string(pairs) + " random pairs, " +
         std::to_string(declined) + " declined as integer-only");
  return c.report("interpolants satisfy their postconditions");
}

bool criterion7() {
  Criterion c(7);
  const std::pair<const char*, const char*> inputs[] = {
      {"esparza/esparza_n5.sys", "esparza/reach_c.prop"},
      {"prodcons/prodcons_3_3.sys", "prodcons/term.prop"},
      {"esparza/esparza_n3_mutated.sys", "esparza/reach_c.prop"},
      {"lock/lock.sys", "lock/mutex.prop"},
  };
  for (const auto& [model, property] : inputs) {
    auto render = [&](Heuristic h) {
      Case k(model, property, h);
      ReportSources src{render_model(k.sys.system()), render_property(k.prop, k.sys)};
      return to_json(k.tb, k.verdict, src, false).dump(2) + "\n" + export_dot(k.tb);
    };
    for (auto h : {Heuristic::Smart, Heuristic::Naive})
      c.expect(render(h) == render(h), std::string(model) + " differs between runs");
  }
  c.note("JSON and DOT byte-identical across repeated runs");
  return c.report("output is deterministic");
}

}  // namespace

int main() {
  const std::vector<std::function<bool()>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                       criterion5, criterion6, criterion7};
  int failed = 0;
  for (const auto& run : criteria) {
    try {
      failed += !run();
    } catch (const std::exception& e) {
      std::cout << "FAIL criterion aborted: " << e.what() << "\n";
      ++failed;
    }
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << 7 - failed << "/7\n";
  return failed ? 1 : 0;
}
