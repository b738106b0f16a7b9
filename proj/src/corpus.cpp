#include "causal/corpus.hpp"

#include <sstream>

namespace causal::corpus {

std::string esparza(int n, bool mutated) {
  std::ostringstream os;
  os << "system esparza_n" << n << (mutated ? "_mutated" : "") << " {\n";
  os << "  process P0 {\n"
     << "    locations r1, r2, r3 init r1;\n"
     << "    trans a0: r1 -> r2;\n"
     << "    trans c0: r2 -> r3;\n"
     << "  }\n";
  os << "  process P1 {\n"
     << "    locations s1, s2, s3, s4 init s1;\n"
     << "    trans b1: s1 -> s2;\n";
  if (mutated) os << "    // mutation: a1 used to lead to s4\n";
  os << "    trans a1: s1 -> " << (mutated ? "s2" : "s4") << ";\n"
     << "    trans c1: s2 -> s3;\n"
     << "  }\n";
  for (int i = 2; i <= n; ++i)
    os << "  process P" << i << " {\n"
       << "    locations t1, t2, t3 init t1;\n"
       << "    trans b" << i << ": t1 -> t2;\n"
       << "    trans c" << i << ": t2 -> t3;\n"
       << "  }\n";
  os << "  sync {\n    a = {a0, a1};\n";
  for (int i = 1; i <= n; ++i) os << "    b" << i << " = {b" << i << "};\n";
  os << "    c = {c0";
  for (int i = 1; i <= n; ++i) os << ", c" << i;
  os << "};\n  }\n}\n";
  return os.str();
}

std::string prodcons(int producers, int consumers, int queues, int pool, bool decrement,
                     const std::string& name) {
  std::ostringstream os;
  os << "system "
     << (name.empty() ? "prodcons_" + std::to_string(producers) + "_" + std::to_string(consumers)
                      : name)
     << " {\n";
  for (int i = 1; i <= producers; ++i)
    os << "  var p" << i << ": int in 0.." << pool << " init " << pool << ";\n";
  for (int j = 1; j <= queues; ++j)
    os << "  var q" << j << ": int in 0.." << producers * pool << " init 0;\n";
  for (int i = 1; i <= producers; ++i) {
    os << "  process Prod" << i << " {\n"
       << "    locations l1, l2, l3 init l1;\n"
       << "    trans a" << i << "_1: l1 -> l2 when p" << i << " > 0;\n";
    for (int j = 1; j <= queues; ++j)
      os << "    trans a" << i << "_q" << j << ": l2 -> l3 update q" << j << " := q" << j
         << " + 1;\n";
    os << "    trans a" << i << "_4: l3 -> l1 update p" << i << " := p" << i << " - 1;\n"
       << "  }\n";
  }
  for (int i = 1; i <= consumers; ++i) {
    os << "  process Cons" << i << " {\n"
       << "    locations l1, l2, l3, l4 init l1;\n"
       << "    trans c" << i << "_1: l1 -> l2 when q" << i << " > 0;\n"
       << "    trans c" << i << "_2: l2 -> l3;\n"
       << "    trans c" << i << "_3: l3 -> l4;\n";
    if (decrement)
      os << "    trans c" << i << "_4: l4 -> l1 update q" << i << " := q" << i << " - 1;\n";
    else
      os << "    trans c" << i << "_4: l4 -> l1;\n";
    os << "  }\n";
  }
  os << "}\n";
  return os.str();
}

std::string lock(bool broken) {
  std::ostringstream os;
  os << "system " << (broken ? "lock_broken" : "lock") << " {\n";
  if (!broken) os << "  var lock: int in 0..1 init 0;\n";
  for (int i = 1; i <= 2; ++i) {
    os << "  process P" << i << " {\n"
       << "    locations idle, try, crit init idle;\n"
       << "    trans req" << i << ": idle -> try;\n";
    if (broken)
      os << "    // bug: the lock is never consulted\n"
         << "    trans enter" << i << ": try -> crit;\n"
         << "    trans exit" << i << ": crit -> idle;\n";
    else
      os << "    trans enter" << i << ": try -> crit when lock = 0 update lock := 1;\n"
         << "    trans exit" << i << ": crit -> idle update lock := 0;\n";
    os << "  }\n";
  }
  os << "}\n";
  return os.str();
}

std::string reach_c() { return "property reach_c reach trans(c);\n"; }

std::string termination() { return "property term termination;\n"; }

std::string mutex() {
  return "// both processes in the critical section at once\n"
         "property mutex violation {\n"
         "  event i: init;\n"
         "  event v: loc_P1 = crit & loc_P2 = crit;\n"
         "  link i -> v;\n"
         "  conflict i # v;\n"
         "}\n";
}

std::string precedence() {
  return "// P2 enters while P1 waits, before P1 gets in\n"
         "property precedence violation {\n"
         "  event a: init;\n"
         "  event b: loc_P1 = try & loc_P2 != crit;\n"
         "  event c: loc_P2 = crit;\n"
         "  link a -> b;\n"
         "  conflict a # b;\n"
         "  link b -> c label loc_P1 != crit;\n"
         "}\n";
}

std::string overtaking() {
  return "// P2 enters twice while P1 waits\n"
         "property overtaking violation {\n"
         "  event a: init;\n"
         "  event b: loc_P1 = try & loc_P2 != crit;\n"
         "  event c: loc_P2 = crit;\n"
         "  event d: loc_P2 != crit;\n"
         "  event e: loc_P2 = crit;\n"
         "  link a -> b;\n"
         "  conflict a # b;\n"
         "  link b -> c;\n"
         "  link c -> d;\n"
         "  link d -> e;\n"
         "  link b -> e label loc_P1 != crit;\n"
         "}\n";
}

std::map<std::string, std::string> files() {
  std::map<std::string, std::string> out;
  for (int n = 1; n <= 10; ++n) out["esparza/esparza_n" + std::to_string(n) + ".sys"] = esparza(n);
  out["esparza/esparza_n3_mutated.sys"] = esparza(3, true);
  out["esparza/reach_c.prop"] = reach_c();
  for (int k = 1; k <= 5; ++k) {
    const auto kk = std::to_string(k) + "_" + std::to_string(k);
    out["prodcons/prodcons_" + kk + ".sys"] = prodcons(k, k, k, 2);
  }
  out["prodcons/prodcons_1_1_q2.sys"] = prodcons(1, 1, 2, 2, true, "prodcons_1_1_q2");
  out["prodcons/prodcons_2_2_pool3.sys"] = prodcons(2, 2, 2, 3, true, "prodcons_2_2_pool3");
  out["prodcons/prodcons_1_1_nodec.sys"] = prodcons(1, 1, 1, 2, false, "prodcons_1_1_nodec");
  out["prodcons/term.prop"] = termination();
  out["lock/lock.sys"] = lock(false);
  out["lock/lock_broken.sys"] = lock(true);
  out["lock/mutex.prop"] = mutex();
  out["lock/precedence.prop"] = precedence();
  out["lock/overtaking.prop"] = overtaking();
  return out;
}

}  // namespace causal::corpus
