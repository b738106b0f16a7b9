// Command-line front end: tableau checks, explicit-state oracles, proof
// re-validation and corpus generation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "causal/corpus.hpp"
#include "causal/dsl.hpp"
#include "causal/oracle.hpp"
#include "causal/proof_check.hpp"
#include "causal/report.hpp"

namespace fs = std::filesystem;
using namespace causal;

namespace {

constexpr int kProven = 0;
constexpr int kViolated = 10;
constexpr int kUnknown = 20;
constexpr int kInputError = 2;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Write to a sibling temporary, then rename over the target.
void write_atomically(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw InputError("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

TransitionSystem load_model(const std::string& path) {
  const auto text = slurp(path);
  try {
    return parse_model(text);
  } catch (const ParseError& e) {
    throw InputError(path + ": " + e.what());
  }
}

PropertySpec load_property(const std::string& path, const ComposedSystem& sys) {
  const auto text = slurp(path);
  try {
    return parse_property(text, sys);
  } catch (const ParseError& e) {
    throw InputError(path + ": " + e.what());
  }
}

void print_run(const Explorer& ex, const Run& run) {
  for (std::size_t i = 0; i < run.states.size(); ++i) {
    if (run.loop_start && *run.loop_start == i) std::cout << "  -- loop --\n";
    std::cout << "  " << ex.render(run.states[i]) << "\n";
    if (i < run.transitions.size()) std::cout << "    --" << run.transitions[i] << "-->\n";
  }
  if (run.loop_start) std::cout << "  -- back to state " << *run.loop_start << " --\n";
}

struct CheckArgs {
  std::string model, property, heuristic = "smart", dot, json;
  std::size_t max_nodes = 20000, horizon = 0;
  bool no_time = false;
};

int cmd_check(const CheckArgs& a) {
  const auto system = load_model(a.model);
  const ComposedSystem sys(system);
  const auto prop = load_property(a.property, sys);
  TableauOptions opts;
  opts.heuristic = a.heuristic == "naive" ? Heuristic::Naive : Heuristic::Smart;
  opts.max_nodes = a.max_nodes;
  opts.horizon = a.horizon;
  Tableau tableau(sys, prop, opts);
  const auto verdict = tableau.run();

  std::cout << verdict_name(verdict.kind) << ": " << verdict.reason << "\n";
  std::cout << "nodes: " << tableau.nodes().size() << ", expanded: " << tableau.expanded()
            << ", coverings: " << tableau.coverings().size() << "\n";
  if (verdict.witness) {
    std::cout << "witness:\n";
    print_run(Explorer(sys), *verdict.witness);
  }
  if (!a.dot.empty()) write_atomically(a.dot, export_dot(tableau));
  if (!a.json.empty()) {
    ReportSources src{render_model(system), render_property(prop, sys)};
    write_atomically(a.json, to_json(tableau, verdict, src, !a.no_time).dump(2) + "\n");
  }
  switch (verdict.kind) {
    case VerdictKind::Proven: return kProven;
    case VerdictKind::Violated: return kViolated;
    default: return kUnknown;
  }
}

int cmd_oracle(const std::string& mode, const std::string& model, const std::string& property,
               std::size_t cap) {
  const ComposedSystem sys(load_model(model));
  const Explorer ex(sys);
  if (mode == "count") {
    std::cout << enumerate_reachable(sys, cap).size() << "\n";
    return kProven;
  }
  std::optional<Run> run;
  if (mode == "term") {
    run = check_termination(sys, cap);
    std::cout << (run ? "non-terminating" : "terminating") << "\n";
  } else {
    if (property.empty()) throw InputError("oracle reach needs a property file");
    const auto prop = load_property(property, sys);
    ReachTarget target;
    if (prop.kind == PropertySpec::Kind::ReachTransition) target = ReachTarget::fires(prop.transition);
    else if (prop.kind == PropertySpec::Kind::ReachPredicate) target = ReachTarget::holds(prop.predicate);
    else throw InputError("oracle reach needs a reach property");
    run = check_reachability(sys, target, cap);
    std::cout << (run ? "reachable" : "unreachable") << "\n";
  }
  if (run) print_run(ex, *run);
  return run ? kViolated : kProven;
}

int cmd_prove_check(const std::string& path) {
  nlohmann::json report;
  try {
    report = nlohmann::json::parse(slurp(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
  const auto result = check_proof(report);
  if (result.ok) {
    std::cout << "proof accepted\n";
    return kProven;
  }
  std::cout << "proof rejected\n";
  for (const auto& p : result.problems) std::cerr << "  " << p << "\n";
  return kUnknown;
}

int cmd_generate(const std::string& dir) {
  for (const auto& [rel, text] : corpus::files()) write_atomically(fs::path(dir) / rel, text);
  std::cout << corpus::files().size() << " files written to " << dir << "\n";
  return kProven;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causality-based model checker"};
  app.require_subcommand(1);

  CheckArgs ca;
  auto* check = app.add_subcommand("check", "Prove or refute a property with the trace tableau");
  check->add_option("model", ca.model, "Model file")->required();
  check->add_option("property", ca.property, "Property file")->required();
  check->add_option("--heuristic", ca.heuristic, "Rule order")
      ->check(CLI::IsMember({"smart", "naive"}));
  check->add_option("--max-nodes", ca.max_nodes, "Node budget");
  check->add_option("--horizon", ca.horizon, "Counterexample search depth (0: automatic)");
  check->add_option("--dot", ca.dot, "Write the tableau as DOT");
  check->add_option("--json", ca.json, "Write the proof report as JSON");
  check->add_flag("--no-time", ca.no_time, "Omit timing from the JSON report");

  std::string omode, omodel, oprop;
  std::size_t ocap = kDefaultStateCap;
  auto* oracle = app.add_subcommand("oracle", "Explicit-state ground truth");
  oracle->add_option("mode", omode, "reach | term | count")
      ->required()
      ->check(CLI::IsMember({"reach", "term", "count"}));
  oracle->add_option("model", omodel, "Model file")->required();
  oracle->add_option("property", oprop, "Property file (reach only)");
  oracle->add_option("--cap", ocap, "State cap");

  std::string report;
  auto* prove = app.add_subcommand("prove-check", "Re-validate a JSON proof report");
  prove->add_option("report", report, "JSON report")->required();

  std::string outdir = "corpus";
  auto* gen = app.add_subcommand("generate", "Write the benchmark corpus");
  gen->add_option("dir", outdir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kInputError;
  }

  try {
    if (*check) return cmd_check(ca);
    if (*oracle) return cmd_oracle(omode, omodel, oprop, ocap);
    if (*prove) return cmd_prove_check(report);
    if (*gen) return cmd_generate(outdir);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const OracleError& e) {
    std::cerr << "oracle: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
