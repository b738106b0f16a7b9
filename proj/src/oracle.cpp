#include "causal/oracle.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace causal {

namespace {

struct StateHash {
  std::size_t operator()(const ExplicitState& s) const {
    std::size_t h = 1469598103934665603ull;
    for (auto v : s) h = (h ^ static_cast<std::size_t>(v)) * 1099511628211ull;
    return h;
  }
};

template <class V>
using StateMap = std::unordered_map<ExplicitState, V, StateHash>;

std::size_t index_of(const std::vector<std::string>& xs, const std::string& x) {
  return static_cast<std::size_t>(std::find(xs.begin(), xs.end(), x) - xs.begin());
}

}  // namespace

Explorer::Explorer(const ComposedSystem& sys) : sys_(sys) {
  for (const auto& g : sys_.transitions()) {
    std::vector<const LocalTransition*> ms;
    for (const auto& m : g.members) ms.push_back(sys_.system().find_local(m));
    members_.push_back(std::move(ms));
  }
}

ExplicitState Explorer::initial() const {
  const auto& s = sys_.system();
  ExplicitState out;
  for (const auto& p : s.processes)
    out.push_back(static_cast<std::int64_t>(index_of(p.locations, p.initial)));
  for (const auto& v : s.integers) out.push_back(v.initial);
  return out;
}

Valuation Explorer::valuation(const ExplicitState& st) const {
  const auto& s = sys_.system();
  Valuation val;
  std::size_t i = 0;
  for (const auto& p : s.processes)
    val[location_variable(p.name)] = p.locations[static_cast<std::size_t>(st[i++])];
  for (const auto& v : s.integers) val[v.name] = st[i++];
  return val;
}

std::string Explorer::render(const ExplicitState& st) const {
  std::ostringstream os;
  bool first = true;
  for (const auto& [k, v] : valuation(st)) {
    os << (first ? "" : " ") << k << "=";
    if (const auto* x = std::get_if<std::int64_t>(&v)) os << *x;
    else os << std::get<std::string>(v);
    first = false;
  }
  return os.str();
}

std::optional<ExplicitState> Explorer::fire(const ExplicitState& st, std::size_t g) const {
  const auto& s = sys_.system();
  const std::size_t np = s.processes.size();
  Valuation val;
  bool have_val = false;
  ExplicitState next = st;
  for (const auto* t : members_.at(g)) {
    std::size_t pi = 0;
    while (s.processes[pi].name != t->process) ++pi;
    const auto& locs = s.processes[pi].locations;
    if (st[pi] != static_cast<std::int64_t>(index_of(locs, t->source))) return std::nullopt;
    if (!t->guard.is_true() || !t->updates.empty()) {
      if (!have_val) {
        val = valuation(st);
        have_val = true;
      }
    }
    if (!t->guard.is_true() && !eval(t->guard, val, val)) return std::nullopt;
    next[pi] = static_cast<std::int64_t>(index_of(locs, t->target));
    for (const auto& u : t->updates) {
      std::int64_t x = u.expr.constant;
      for (const auto& [v, c] : u.expr.terms) x += c * std::get<std::int64_t>(val.at(v.name));
      std::size_t vi = 0;
      while (s.integers[vi].name != u.var) ++vi;
      const auto& decl = s.integers[vi];
      if ((decl.lower && x < *decl.lower) || (decl.upper && x > *decl.upper))
        throw OracleError("transition '" + sys_.transitions()[g].name + "' drives '" + u.var +
                          "' to " + std::to_string(x) + ", outside its declared range");
      next[np + vi] = x;
    }
  }
  return next;
}

std::vector<std::pair<std::size_t, ExplicitState>> Explorer::successors(
    const ExplicitState& st) const {
  std::vector<std::pair<std::size_t, ExplicitState>> out;
  for (std::size_t g = 0; g < members_.size(); ++g)
    if (auto n = fire(st, g)) out.emplace_back(g, std::move(*n));
  return out;
}

std::vector<ExplicitState> enumerate_reachable(const ComposedSystem& sys, std::size_t cap) {
  Explorer ex(sys);
  StateMap<char> seen;
  std::vector<ExplicitState> order{ex.initial()};
  seen.emplace(order.front(), 1);
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (auto& [g, n] : ex.successors(order[i])) {
      if (seen.emplace(n, 1).second) {
        if (order.size() >= cap)
          throw OracleError("state cap of " + std::to_string(cap) + " exceeded");
        order.push_back(std::move(n));
      }
    }
  }
  return order;
}

namespace {

Run rebuild(const StateMap<std::pair<ExplicitState, std::size_t>>& parent,
            const ExplicitState& init, ExplicitState last, const Explorer& ex) {
  Run run;
  while (last != init) {
    const auto& [prev, g] = parent.at(last);
    run.states.push_back(last);
    run.transitions.push_back(ex.system().transitions()[g].name);
    last = prev;
  }
  run.states.push_back(init);
  std::reverse(run.states.begin(), run.states.end());
  std::reverse(run.transitions.begin(), run.transitions.end());
  return run;
}

}  // namespace

std::optional<Run> check_reachability(const ComposedSystem& sys, const ReachTarget& target,
                                      std::size_t cap) {
  Explorer ex(sys);
  std::optional<std::size_t> goal;
  if (!target.transition.empty()) {
    for (std::size_t g = 0; g < sys.transitions().size(); ++g)
      if (sys.transitions()[g].name == target.transition) goal = g;
    if (!goal) throw OracleError("unknown transition '" + target.transition + "'");
  }
  auto hit = [&](const ExplicitState& s) { return !goal && eval(target.predicate, ex.valuation(s), ex.valuation(s)); };
  const auto init = ex.initial();
  if (hit(init)) return Run{{init}, {}, std::nullopt};
  StateMap<std::pair<ExplicitState, std::size_t>> parent;
  parent.emplace(init, std::make_pair(init, 0));
  std::deque<ExplicitState> queue{init};
  while (!queue.empty()) {
    auto s = std::move(queue.front());
    queue.pop_front();
    for (auto& [g, n] : ex.successors(s)) {
      if (goal && g == *goal) {
        auto run = rebuild(parent, init, s, ex);
        run.states.push_back(n);
        run.transitions.push_back(sys.transitions()[g].name);
        return run;
      }
      if (!parent.emplace(n, std::make_pair(s, g)).second) continue;
      if (parent.size() > cap) throw OracleError("state cap of " + std::to_string(cap) + " exceeded");
      if (hit(n)) return rebuild(parent, init, n, ex);
      queue.push_back(std::move(n));
    }
  }
  return std::nullopt;
}

std::optional<Run> check_termination(const ComposedSystem& sys, std::size_t cap) {
  // Every state is accepting, so the nested search starts from each state as
  // it is finished by the outer search and looks for a path back to it.
  Explorer ex(sys);
  struct Frame {
    ExplicitState state;
    std::vector<std::pair<std::size_t, ExplicitState>> succ;
    std::size_t next = 0;
  };
  StateMap<char> blue, red;
  std::vector<Frame> outer;
  auto push = [&](std::vector<Frame>& stack, ExplicitState s) {
    auto succ = ex.successors(s);
    stack.push_back({std::move(s), std::move(succ), 0});
  };
  const auto init = ex.initial();
  blue.emplace(init, 1);
  push(outer, init);
  while (!outer.empty()) {
    auto& top = outer.back();
    if (top.next < top.succ.size()) {
      auto [g, n] = top.succ[top.next++];
      if (blue.emplace(n, 1).second) {
        if (blue.size() > cap) throw OracleError("state cap of " + std::to_string(cap) + " exceeded");
        push(outer, std::move(n));
      }
      continue;
    }
    // Post-order: nested search from the seed.
    const ExplicitState seed = top.state;
    std::vector<Frame> inner;
    if (!red.count(seed)) {
      red.emplace(seed, 1);
      push(inner, seed);
    }
    while (!inner.empty()) {
      auto& it = inner.back();
      if (it.next >= it.succ.size()) {
        inner.pop_back();
        continue;
      }
      auto [g, n] = it.succ[it.next++];
      if (n == seed) {
        // Lasso: outer stack up to the seed, then the inner path, closing on
        // the seed.
        Run run;
        for (std::size_t i = 0; i < outer.size(); ++i) {
          run.states.push_back(outer[i].state);
          if (i + 1 < outer.size())
            run.transitions.push_back(
                sys.transitions()[outer[i].succ[outer[i].next - 1].first].name);
        }
        run.loop_start = outer.size() - 1;
        for (std::size_t i = 0; i < inner.size(); ++i) {
          const auto& f = inner[i];
          run.transitions.push_back(sys.transitions()[f.succ[f.next - 1].first].name);
          if (i + 1 < inner.size()) run.states.push_back(inner[i + 1].state);
        }
        return run;
      }
      if (red.emplace(n, 1).second) push(inner, std::move(n));
    }
    outer.pop_back();
  }
  return std::nullopt;
}

void for_each_run(const ComposedSystem& sys, std::size_t horizon,
                  const std::function<bool(const Run&)>& visit) {
  Explorer ex(sys);
  Run run{{ex.initial()}, {}, std::nullopt};
  std::function<bool()> go = [&]() -> bool {
    if (!visit(run)) return false;
    if (run.transitions.size() >= horizon) return true;
    for (auto& [g, n] : ex.successors(run.states.back())) {
      run.states.push_back(std::move(n));
      run.transitions.push_back(sys.transitions()[g].name);
      bool more = go();
      run.states.pop_back();
      run.transitions.pop_back();
      if (!more) return false;
    }
    return true;
  };
  go();
}

std::vector<Run> enumerate_runs(const ComposedSystem& sys, std::size_t horizon) {
  Explorer ex(sys);
  std::vector<Run> out;
  for_each_run(sys, horizon, [&](const Run& r) {
    if (r.transitions.size() == horizon || ex.successors(r.states.back()).empty())
      out.push_back(r);
    return true;
  });
  return out;
}

void for_each_lasso(const ComposedSystem& sys, std::size_t horizon,
                    const std::function<bool(const Run&)>& visit) {
  for_each_run(sys, horizon, [&](const Run& r) {
    if (r.states.size() < 2) return true;
    const auto& last = r.states.back();
    for (std::size_t i = 0; i + 1 < r.states.size(); ++i) {
      if (r.states[i] != last) continue;
      Run lasso;
      lasso.states.assign(r.states.begin(), r.states.end() - 1);
      lasso.transitions = r.transitions;
      lasso.loop_start = i;
      if (!visit(lasso)) return false;
    }
    return true;
  });
}

bool validate_run(const ComposedSystem& sys, const Run& run, std::string* problem) {
  auto fail = [&](const std::string& why) {
    if (problem) *problem = why;
    return false;
  };
  Explorer ex(sys);
  if (run.states.empty()) return fail("run has no states");
  if (run.states.front() != ex.initial()) return fail("first state is not initial");
  const std::size_t steps = run.states.size() - 1 + (run.is_lasso() ? 1 : 0);
  if (run.transitions.size() != steps) return fail("transition count does not match states");
  if (run.is_lasso() && *run.loop_start >= run.states.size()) return fail("loop start out of range");
  for (std::size_t i = 0; i < steps; ++i) {
    const auto* g = sys.find(run.transitions[i]);
    if (!g) return fail("unknown transition '" + run.transitions[i] + "'");
    auto gi = static_cast<std::size_t>(g - sys.transitions().data());
    const auto& to = i + 1 < run.states.size() ? run.states[i + 1] : run.states[*run.loop_start];
    auto n = ex.fire(run.states[i], gi);
    if (!n) return fail("step " + std::to_string(i) + ": '" + g->name + "' is not enabled");
    if (*n != to) return fail("step " + std::to_string(i) + ": '" + g->name + "' leads elsewhere");
  }
  return true;
}

Computation to_computation(const Explorer& ex, const Run& run) {
  Computation c;
  c.states.push_back(ex.valuation(run.states.front()));
  for (const auto& s : run.states) c.states.push_back(ex.valuation(s));
  if (run.loop_start) c.loop_start = *run.loop_start + 1;
  return c;
}

}  // namespace causal
