#include "causal/proof_check.hpp"

#include <map>
#include <optional>
#include <sstream>

#include "causal/dsl.hpp"
#include "causal/tableau.hpp"

namespace causal {

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(item);
  return out;
}

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (const auto& x : xs) out += (out.empty() ? "" : ",") + x;
  return out;
}

struct Record {
  int id = 0;
  std::optional<int> parent;
  std::optional<Rule> rule;
  Params params;
  std::string trace;
  std::vector<int> children;
};

const std::string& param(const Params& p, const char* key) {
  auto it = p.find(key);
  if (it == p.end()) throw RuleError(std::string("missing parameter '") + key + "'");
  return it->second;
}

Atom single_atom(const std::string& text, const Signature& sig) {
  auto f = parse_formula(text, sig);
  if (f.atoms().size() != 1) throw RuleError("predicate '" + text + "' is not a single atom");
  return f.atoms().front();
}

class Checker {
 public:
  Checker(const ComposedSystem& sys, const nlohmann::json& report) : sys_(sys), report_(report) {}

  ProofCheck run(const PropertySpec& prop) {
    if (!load()) return finish();
    // Roots.
    auto roots = initial_roots(sys_, prop);
    std::vector<int> recorded_roots;
    for (const auto& [id, r] : records_)
      if (!r.parent) recorded_roots.push_back(id);
    if (recorded_roots.size() != roots.size()) {
      problem("expected " + std::to_string(roots.size()) + " root(s), report has " +
              std::to_string(recorded_roots.size()));
      return finish();
    }
    for (std::size_t i = 0; i < roots.size(); ++i) {
      if (to_string(roots[i]) != records_[recorded_roots[i]].trace)
        problem("root " + std::to_string(recorded_roots[i]) + " does not encode the property");
      traces_[recorded_roots[i]] = roots[i];
    }
    // Productions, in id order so parents come first.
    for (auto& [id, r] : records_) {
      if (!traces_.count(id)) continue;
      if (r.rule) replay(r);
      else if (!r.children.empty()) problem("node " + std::to_string(id) + " has children but no rule");
    }
    for (const auto& [id, r] : records_)
      if (!traces_.count(id)) problem("node " + std::to_string(id) + " is unreachable from a root");
    check_coverings();
    // Least fixpoint of closedness.
    for (bool changed = true; changed;) {
      changed = false;
      for (const auto& [id, r] : records_) {
        if (closed_.count(id)) continue;
        bool c = false;
        if (self_closing_.count(id)) {
          c = true;
        } else if (valid_expansion_.count(id)) {
          c = true;
          for (int k : r.children) c = c && closed_.count(k);
        } else if (auto it = cover_.find(id); it != cover_.end()) {
          c = closed_.count(it->second) != 0;
        }
        if (c) {
          closed_.insert(id);
          changed = true;
        }
      }
    }
    for (int r : recorded_roots)
      if (!closed_.count(r)) problem("root " + std::to_string(r) + " is not closed");
    return finish();
  }

 private:
  void problem(const std::string& p) { problems_.push_back(p); }

  ProofCheck finish() { return {problems_.empty(), problems_}; }

  bool load() {
    if (report_.value("format", 0) != 1) {
      problem("unsupported report format");
      return false;
    }
    if (report_.value("verdict", std::string()) != "proven") {
      problem("report does not claim a proof");
      return false;
    }
    for (const auto& n : report_.at("nodes")) {
      Record r;
      r.id = n.at("id").get<int>();
      if (!n.at("parent").is_null()) r.parent = n.at("parent").get<int>();
      if (!n.at("rule").is_null()) {
        auto name = n.at("rule").get<std::string>();
        r.rule = rule_from_name(name);
        if (!r.rule) problem("node " + std::to_string(r.id) + ": unknown rule '" + name + "'");
      }
      r.params = n.at("params").get<Params>();
      r.trace = n.at("trace").get<std::string>();
      if (records_.count(r.id)) problem("duplicate node id " + std::to_string(r.id));
      records_[r.id] = r;
    }
    for (auto& [id, r] : records_) {
      if (!r.parent) continue;
      if (!records_.count(*r.parent) || *r.parent >= id) {
        problem("node " + std::to_string(id) + " has an invalid parent");
        return false;
      }
      records_[*r.parent].children.push_back(id);
    }
    return problems_.empty();
  }

  void compare_children(const Record& r, const std::vector<AnyTrace>& kids) {
    if (kids.size() != r.children.size()) {
      problem("node " + std::to_string(r.id) + ": rule yields " + std::to_string(kids.size()) +
              " children, report has " + std::to_string(r.children.size()));
      return;
    }
    for (std::size_t i = 0; i < kids.size(); ++i) {
      int k = r.children[i];
      if (to_string(kids[i]) != records_[k].trace) {
        problem("node " + std::to_string(k) + ": trace differs from the replayed production");
        return;
      }
    }
    for (std::size_t i = 0; i < kids.size(); ++i) traces_[r.children[i]] = kids[i];
    valid_expansion_.insert(r.id);
  }

  void replay(const Record& r) {
    const auto& t = traces_.at(r.id);
    const auto& sig = sys_.signature();
    const auto& p = r.params;
    const auto where = "node " + std::to_string(r.id) + ": ";
    try {
      std::vector<AnyTrace> kids;
      switch (*r.rule) {
        case Rule::ContradictionClose:
          if (!r.children.empty()) throw RuleError("a closing rule has no children");
          if (!p.empty()) throw RuleError("unexpected parameters");
          if (!contradictory(t, sys_)) throw RuleError("trace is not contradictory");
          self_closing_.insert(r.id);
          return;
        case Rule::TerminatingClose:
          throw RuleError("TerminatingClose only appears inside InvarianceSplit");
        case Rule::OrderSplit: {
          if (p.size() != 2) throw RuleError("unexpected parameters");
          for (auto& c : order_split(std::get<ConcurrentTrace>(t), param(p, "first"),
                                     param(p, "second"), sig))
            kids.push_back(c);
          break;
        }
        case Rule::LastNecessaryEvent: {
          const auto& ct = std::get<ConcurrentTrace>(t);
          const auto psi = single_atom(param(p, "predicate"), sig);
          const auto& pred = param(p, "pred");
          kids.push_back(last_necessary_event(ct, pred, param(p, "target"), psi,
                                              param(p, "event"), sys_));
          std::size_t expected = 4;
          if (p.count("interpolant")) {
            ++expected;
            auto a = post_state(ct.event(pred).label, sig);
            auto b = Formula::of(psi);
            auto itp = parse_formula(p.at("interpolant"), sig);
            if (!is_interpolant(a, b, itp, sig) || itp != interpolate(a, b, sig))
              throw RuleError("recorded interpolant is not the interpolant of the boundary");
          }
          if (p.size() != expected) throw RuleError("unexpected parameters");
          break;
        }
        case Rule::NecessaryEvent: {
          if (p.size() != 4) throw RuleError("unexpected parameters");
          kids.push_back(necessary_event(std::get<ConcurrentTrace>(t), param(p, "from"),
                                         param(p, "to"), single_atom(param(p, "predicate"), sig),
                                         param(p, "event"), sys_));
          break;
        }
        case Rule::InvarianceSplit: {
          if (p.size() != 6) throw RuleError("unexpected parameters");
          const auto& it = std::get<InfiniteTrace>(t);
          RankingWitness w{param(p, "variable"), param(p, "bound_event"),
                           param(p, "decrease_event"), 0};
          try {
            std::size_t used = 0;
            w.bound = std::stoll(param(p, "bound"), &used);
            if (used != param(p, "bound").size()) throw std::invalid_argument("trailing");
          } catch (const std::exception&) {
            throw RuleError("bound is not an integer");
          }
          auto split = invariance_split(it, single_atom(param(p, "predicate"), sig),
                                        param(p, "event"), sys_);
          if (!terminating(split[0], w, sys_))
            throw RuleError("ranking witness does not close the invariant case");
          auto canonical = find_ranking(it, sys_);
          if (!canonical || canonical->variable != w.variable ||
              canonical->bound_event != w.bound_event ||
              canonical->decrease_event != w.decrease_event || canonical->bound != w.bound)
            throw RuleError("ranking witness is not the one the rule selects");
          kids.push_back(split[1]);
          break;
        }
        case Rule::InstantiateCycle: {
          if (p.size() != 2) throw RuleError("unexpected parameters");
          std::vector<std::string> names;
          for (auto& c : instantiate_cycle(std::get<InfiniteTrace>(t), param(p, "event"), sys_, &names))
            kids.push_back(c);
          if (join(names) != param(p, "transitions"))
            throw RuleError("instantiated transitions differ from the record");
          break;
        }
        case Rule::NecessaryCycleEvent: {
          if (p.size() != 4) throw RuleError("unexpected parameters");
          std::vector<std::string> names;
          for (auto& c : necessary_cycle_event(std::get<InfiniteTrace>(t), param(p, "event"),
                                               single_atom(param(p, "predicate"), sig),
                                               split_list(param(p, "events")), sys_, &names))
            kids.push_back(c);
          if (join(names) != param(p, "transitions"))
            throw RuleError("re-establishing transitions differ from the record");
          break;
        }
      }
      compare_children(r, kids);
    } catch (const std::bad_variant_access&) {
      problem(where + "rule does not apply to this kind of trace");
    } catch (const std::exception& e) {
      problem(where + e.what());
    }
  }

  bool is_ancestor(int a, int id) const {
    for (auto p = records_.at(id).parent; p; p = records_.at(*p).parent)
      if (*p == a) return true;
    return false;
  }

  void check_coverings() {
    for (const auto& c : report_.at("coverings")) {
      int from = c.at("from").get<int>(), to = c.at("to").get<int>();
      const auto where = "covering " + std::to_string(from) + " -> " + std::to_string(to) + ": ";
      if (!records_.count(from) || !records_.count(to) || !traces_.count(from) || !traces_.count(to)) {
        problem(where + "unknown node");
        continue;
      }
      if (from == to || is_ancestor(to, from)) {
        problem(where + "target is the node itself or an ancestor");
        continue;
      }
      if (records_[from].rule || !records_[from].children.empty()) {
        problem(where + "covered node was also expanded");
        continue;
      }
      if (cover_.count(from)) {
        problem(where + "node is covered twice");
        continue;
      }
      const auto& small = traces_.at(to);
      const auto& big = traces_.at(from);
      bool ok = false;
      if (small.index() == big.index()) {
        if (const auto* s = std::get_if<ConcurrentTrace>(&small))
          ok = embed(*s, std::get<ConcurrentTrace>(big), sys_.signature()).has_value();
        else
          ok = embed(std::get<InfiniteTrace>(small), std::get<InfiniteTrace>(big), sys_.signature())
                   .has_value();
      }
      if (!ok) {
        problem(where + "target trace does not embed");
        continue;
      }
      cover_[from] = to;
    }
  }

  const ComposedSystem& sys_;
  const nlohmann::json& report_;
  std::map<int, Record> records_;
  std::map<int, AnyTrace> traces_;
  std::set<int> self_closing_, valid_expansion_, closed_;
  std::map<int, int> cover_;
  std::vector<std::string> problems_;
};

}  // namespace

ProofCheck check_proof(const nlohmann::json& report) {
  try {
    auto sys = ComposedSystem(parse_model(report.at("model").get<std::string>()));
    auto prop = parse_property(report.at("property").get<std::string>(), sys);
    return Checker(sys, report).run(prop);
  } catch (const std::exception& e) {
    return {false, {std::string("malformed report: ") + e.what()}};
  }
}

}  // namespace causal
