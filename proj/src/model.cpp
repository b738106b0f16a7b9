#include "causal/model.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace causal {

std::string location_variable(const std::string& process) { return "loc_" + process; }

const Process* TransitionSystem::find_process(const std::string& n) const {
  for (const auto& p : processes)
    if (p.name == n) return &p;
  return nullptr;
}

const LocalTransition* TransitionSystem::find_local(const std::string& n) const {
  for (const auto& t : locals)
    if (t.name == n) return &t;
  return nullptr;
}

const IntegerVariable* TransitionSystem::find_integer(const std::string& n) const {
  for (const auto& v : integers)
    if (v.name == n) return &v;
  return nullptr;
}

void validate(const TransitionSystem& s) {
  if (s.processes.empty()) throw ModelError("system '" + s.name + "' has no processes");
  std::set<std::string> names;
  auto declare = [&](const std::string& n) {
    if (!names.insert(n).second) throw ModelError("duplicate variable name '" + n + "'");
  };
  for (const auto& v : s.integers) {
    declare(v.name);
    if (v.lower && v.upper && *v.lower > *v.upper)
      throw ModelError("empty range for '" + v.name + "'");
    if ((v.lower && v.initial < *v.lower) || (v.upper && v.initial > *v.upper))
      throw ModelError("initial value of '" + v.name + "' outside its range");
  }
  std::set<std::string> process_names;
  for (const auto& p : s.processes) {
    if (!process_names.insert(p.name).second)
      throw ModelError("duplicate process '" + p.name + "'");
    declare(location_variable(p.name));
    if (p.locations.empty()) throw ModelError("process '" + p.name + "' has no locations");
    std::set<std::string> locs(p.locations.begin(), p.locations.end());
    if (locs.size() != p.locations.size())
      throw ModelError("duplicate location in process '" + p.name + "'");
    if (!locs.count(p.initial))
      throw ModelError("initial location of '" + p.name + "' is not declared");
  }
  std::set<std::string> local_names;
  for (const auto& t : s.locals) {
    if (t.name == "init") throw ModelError("'init' is reserved and cannot name a transition");
    if (!local_names.insert(t.name).second)
      throw ModelError("duplicate transition '" + t.name + "'");
    const auto* p = s.find_process(t.process);
    if (!p) throw ModelError("transition '" + t.name + "' has no owning process");
    auto has = [&](const std::string& l) {
      return std::find(p->locations.begin(), p->locations.end(), l) != p->locations.end();
    };
    if (!has(t.source) || !has(t.target))
      throw ModelError("transition '" + t.name + "' uses a location outside '" + p->name + "'");
    for (const auto& v : vocabulary(t.guard)) {
      if (v.primed) throw ModelError("guard of '" + t.name + "' mentions primed variables");
      if (!s.find_integer(v.name))
        throw ModelError("guard of '" + t.name + "' mentions unknown integer '" + v.name + "'");
    }
    std::set<std::string> assigned;
    for (const auto& u : t.updates) {
      if (!s.find_integer(u.var))
        throw ModelError("transition '" + t.name + "' updates unknown variable '" + u.var + "'");
      if (!assigned.insert(u.var).second)
        throw ModelError("transition '" + t.name + "' updates '" + u.var + "' twice");
      for (const auto& [v, c] : u.expr.terms)
        if (v.primed || !s.find_integer(v.name))
          throw ModelError("update of '" + u.var + "' in '" + t.name + "' is not over current integers");
    }
  }
  std::set<std::string> sync_names;
  std::set<std::string> used;
  for (const auto& g : s.syncs) {
    if (g.name == "init") throw ModelError("'init' is reserved and cannot name a sync vector");
    if (!sync_names.insert(g.name).second)
      throw ModelError("duplicate sync vector '" + g.name + "'");
    if (g.members.empty()) throw ModelError("sync vector '" + g.name + "' is empty");
    std::set<std::string> procs;
    for (const auto& m : g.members) {
      const auto* t = s.find_local(m);
      if (!t) throw ModelError("sync vector '" + g.name + "' references unknown transition '" + m + "'");
      if (!procs.insert(t->process).second)
        throw ModelError("sync vector '" + g.name + "' has two members of process '" + t->process + "'");
      used.insert(m);
    }
  }
  if (!s.syncs.empty()) {
    for (const auto& t : s.locals)
      if (!used.count(t.name))
        throw ModelError("transition '" + t.name + "' is not part of any sync vector");
  }
}

Signature signature_of(const TransitionSystem& s) {
  Signature sig;
  for (const auto& p : s.processes) sig.locations[location_variable(p.name)] = p.locations;
  for (const auto& v : s.integers) sig.integers.insert(v.name);
  return sig;
}

Formula initial_condition(const TransitionSystem& s) {
  Formula init;
  for (const auto& p : s.processes)
    init = conj(init, location_is(location_variable(p.name), p.initial));
  for (const auto& v : s.integers)
    init = conj(init, compare(LinearExpr::variable(Var{v.name}), Cmp::Eq,
                              LinearExpr::number(v.initial)));
  return init;
}

std::vector<GlobalTransition> compose(const TransitionSystem& s) {
  std::vector<SyncVector> vectors = s.syncs;
  if (vectors.empty()) {
    for (const auto& t : s.locals) vectors.push_back({t.name, {t.name}});
  }
  std::vector<GlobalTransition> out;
  for (const auto& g : vectors) {
    Formula rel;
    std::set<std::string> moved;
    std::map<std::string, std::string> updated;  // var -> local transition
    for (const auto& m : g.members) {
      const auto* t = s.find_local(m);
      if (!t) throw ModelError("sync vector '" + g.name + "' references unknown transition '" + m + "'");
      auto lv = location_variable(t->process);
      moved.insert(lv);
      rel = conj(rel, location_is(lv, t->source));
      rel = conj(rel, location_is(lv, t->target, true));
      rel = conj(rel, t->guard);
      for (const auto& u : t->updates) {
        auto [it, fresh] = updated.emplace(u.var, t->name);
        if (!fresh)
          throw ModelError("composition error in '" + g.name + "': '" + u.var +
                           "' updated by both '" + it->second + "' and '" + t->name + "'");
        rel = conj(rel, compare(LinearExpr::variable(Var{u.var, true}), Cmp::Eq, u.expr));
      }
    }
    for (const auto& p : s.processes) {
      auto lv = location_variable(p.name);
      if (!moved.count(lv)) rel = conj(rel, location_frame(lv));
    }
    for (const auto& v : s.integers) {
      if (updated.count(v.name)) continue;
      rel = conj(rel, compare(LinearExpr::variable(Var{v.name, true}), Cmp::Eq,
                              LinearExpr::variable(Var{v.name})));
    }
    out.push_back({g.name, g.members, rel});
  }
  return out;
}

std::size_t transition_count(const TransitionSystem& s) { return compose(s).size(); }

ComposedSystem::ComposedSystem(TransitionSystem system) : system_(std::move(system)) {
  validate(system_);
  signature_ = signature_of(system_);
  init_ = initial_condition(system_);
  Formula step = conj(init_, prime(init_));
  for (const auto& p : system_.processes)
    step = conj(step, location_frame(location_variable(p.name)));
  init_transition_ = {"init", {}, step};
  transitions_ = compose(system_);
}

const GlobalTransition* ComposedSystem::find(const std::string& n) const {
  for (const auto& g : transitions_)
    if (g.name == n) return &g;
  return nullptr;
}

}  // namespace causal
