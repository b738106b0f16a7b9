#include "causal/report.hpp"

#include <sstream>

namespace causal {

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

nlohmann::json run_to_json(const Explorer& ex, const Run& run) {
  nlohmann::json states = nlohmann::json::array();
  for (const auto& s : run.states) {
    nlohmann::json st = nlohmann::json::object();
    for (const auto& [k, v] : ex.valuation(s)) {
      if (const auto* x = std::get_if<std::int64_t>(&v)) st[k] = *x;
      else st[k] = std::get<std::string>(v);
    }
    states.push_back(st);
  }
  nlohmann::json j{{"states", states}, {"transitions", run.transitions}};
  j["loop_start"] = run.loop_start ? nlohmann::json(*run.loop_start) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const Tableau& tableau, const Verdict& verdict,
                       const ReportSources& sources, bool include_time) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : tableau.nodes()) {
    nlohmann::json j;
    j["id"] = n.id;
    j["parent"] = n.parent ? nlohmann::json(*n.parent) : nlohmann::json(nullptr);
    if (n.production) {
      j["rule"] = rule_name(n.production->rule);
      j["params"] = n.production->params;
    } else {
      j["rule"] = nullptr;
      j["params"] = nlohmann::json::object();
    }
    j["trace"] = to_string(n.trace);
    j["status"] = status_name(n.status);
    j["closed"] = n.closed;
    nodes.push_back(j);
  }
  nlohmann::json coverings = nlohmann::json::array();
  for (const auto& c : tableau.coverings())
    coverings.push_back({{"from", c.from}, {"to", c.to}, {"mapping", c.mapping}});

  nlohmann::json report;
  report["format"] = 1;
  report["verdict"] = verdict_name(verdict.kind);
  report["reason"] = verdict.reason;
  report["heuristic"] = heuristic_name(tableau.options().heuristic);
  report["model"] = sources.model;
  report["property"] = sources.property;
  report["nodes"] = nodes;
  report["coverings"] = coverings;
  if (verdict.witness) {
    Explorer ex(tableau.system());
    report["witness"] = run_to_json(ex, *verdict.witness);
  } else {
    report["witness"] = nullptr;
  }
  nlohmann::json stats{{"expanded", tableau.expanded()}, {"nodes", tableau.nodes().size()}};
  if (include_time) stats["time_ms"] = tableau.elapsed_ms();
  report["stats"] = stats;
  return report;
}

std::string export_dot(const Tableau& tableau) {
  std::ostringstream os;
  os << "digraph tableau {\n";
  os << "  node [shape=box, fontname=\"monospace\"];\n";
  for (const auto& n : tableau.nodes()) {
    std::string label = std::to_string(n.id) + ": " + to_string(n.trace);
    if (n.status == NodeStatus::Contradictory) label += "\n⊥";
    os << "  n" << n.id << " [label=\"" << dot_escape(label) << "\"];\n";
  }
  for (const auto& n : tableau.nodes())
    for (int k : n.children)
      os << "  n" << n.id << " -> n" << k << " [label=\"" << rule_name(n.production->rule)
         << "\"];\n";
  for (const auto& c : tableau.coverings())
    os << "  n" << c.from << " -> n" << c.to << " [style=dashed, label=\"covered by\"];\n";
  os << "}\n";
  return os.str();
}

}  // namespace causal
