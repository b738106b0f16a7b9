#include "causal/tableau.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace causal {

namespace {

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (const auto& x : xs) out += (out.empty() ? "" : ",") + x;
  return out;
}

bool strictly_before(const ConcurrentTrace& t, const std::string& a, const std::string& b,
                     const Signature& sig) {
  if (!t.has_path(a, b)) return false;
  return t.in_conflict(a, b) ||
         !is_satisfiable(conj(t.event(a).label, t.event(b).label), sig);
}

/// Atoms usable as a boundary predicate: current-state, single-atom negation.
bool splittable(const Atom& a) {
  if (std::holds_alternative<FrameAtom>(a) || !negate(a)) return false;
  for (const auto& v : vocabulary(a))
    if (v.primed) return false;
  return true;
}

/// Atoms of the pre-state of `label`, with equalities between an integer
/// variable and a constant also offered as their two bounds.
std::vector<Atom> boundary_candidates(const Formula& label, const Signature& sig) {
  std::vector<Atom> out;
  const auto pre = pre_state(label, sig);
  for (const auto& a : pre.atoms()) {
    if (splittable(a)) {
      out.push_back(a);
    } else if (const auto* li = std::get_if<LinearAtom>(&a); li && li->rel == Rel::Eq) {
      for (auto rel : {Rel::Le, Rel::Ge}) {
        LinearAtom half = *li;
        half.rel = rel;
        out.push_back(half);
      }
    }
  }
  return out;
}

std::size_t event_count(const AnyTrace& t) {
  if (const auto* c = std::get_if<ConcurrentTrace>(&t)) return c->events().size();
  const auto& i = std::get<InfiniteTrace>(t);
  return i.stem.events().size() + i.cycle.events().size();
}

}  // namespace

std::string heuristic_name(Heuristic h) { return h == Heuristic::Smart ? "smart" : "naive"; }

std::string status_name(NodeStatus s) {
  switch (s) {
    case NodeStatus::Open: return "open";
    case NodeStatus::Expanded: return "expanded";
    case NodeStatus::Contradictory: return "contradictory";
    case NodeStatus::Covered: return "covered";
    case NodeStatus::Stuck: return "stuck";
  }
  return "open";
}

std::string verdict_name(VerdictKind v) {
  switch (v) {
    case VerdictKind::Proven: return "proven";
    case VerdictKind::Violated: return "violated";
    case VerdictKind::Unknown: return "unknown";
  }
  return "unknown";
}

std::vector<AnyTrace> initial_roots(const ComposedSystem& sys, const PropertySpec& prop) {
  switch (prop.kind) {
    case PropertySpec::Kind::ReachTransition: {
      const auto* g = sys.find(prop.transition);
      if (!g) throw ModelError("property refers to unknown transition '" + prop.transition + "'");
      ConcurrentTrace t;
      t.add_event({"init", prime(sys.init()), ""});
      t.add_event({"target", g->relation, g->name});
      t.add_link("init", "target");
      t.add_conflict("init", "target");
      return {t};
    }
    case PropertySpec::Kind::ReachPredicate: {
      ConcurrentTrace t;
      t.add_event({"init", prime(sys.init()), ""});
      t.add_event({"target", prime(prop.predicate), ""});
      t.add_link("init", "target");
      return {t};
    }
    case PropertySpec::Kind::Termination: {
      InfiniteTrace t;
      t.cycle.add_event({"e", Formula::top(), ""});
      return {t};
    }
    case PropertySpec::Kind::Violation:
      return prop.patterns;
  }
  return {};
}

std::size_t default_horizon(const ComposedSystem& sys, const AnyTrace& trace) {
  return 3 * std::max<std::size_t>(1, event_count(trace)) * sys.system().processes.size();
}

Tableau::Tableau(const ComposedSystem& sys, PropertySpec prop, TableauOptions options)
    : sys_(sys), prop_(std::move(prop)), options_(options) {}

std::string Tableau::fresh_id(int node, int k) const {
  return "n" + std::to_string(node) + "_e" + std::to_string(k);
}

int Tableau::add_node(AnyTrace trace, std::optional<int> parent) {
  TableauNode n;
  n.id = static_cast<int>(nodes_.size()) + 1;
  n.parent = parent;
  n.trace = std::move(trace);
  if (contradictory(n.trace, sys_)) {
    n.status = NodeStatus::Contradictory;
    n.production = Production{Rule::ContradictionClose, {}};
    n.closed = true;
  }
  nodes_.push_back(std::move(n));
  return nodes_.back().id;
}

bool Tableau::is_ancestor(int maybe_ancestor, int id) const {
  for (auto p = node(id).parent; p; p = node(*p).parent)
    if (*p == maybe_ancestor) return true;
  return false;
}

bool Tableau::proven() const {
  if (roots_.empty()) return false;
  return std::all_of(roots_.begin(), roots_.end(), [&](int r) { return node(r).closed; });
}

std::optional<Covering> Tableau::try_cover(int id) {
  const auto& big = node(id).trace;
  for (const auto& v : nodes_) {
    if (v.id == id || !v.closed || is_ancestor(v.id, id)) continue;
    if (v.trace.index() != big.index() || event_count(v.trace) > event_count(big)) continue;
    std::optional<EventMap> m;
    if (const auto* small = std::get_if<ConcurrentTrace>(&v.trace))
      m = embed(*small, std::get<ConcurrentTrace>(big), sys_.signature());
    else
      m = embed(std::get<InfiniteTrace>(v.trace), std::get<InfiniteTrace>(big), sys_.signature());
    if (!m) continue;
    cover(id, v.id, *m);
    return coverings_.back();
  }
  return std::nullopt;
}

void Tableau::cover(int from, int to, EventMap mapping) {
  mut(from).status = NodeStatus::Covered;
  coverings_.push_back({from, to, std::move(mapping)});
}

void Tableau::propagate() {
  std::map<int, int> target;
  for (const auto& c : coverings_) target[c.from] = c.to;
  for (bool changed = true; changed;) {
    changed = false;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
      auto& n = *it;
      if (n.closed) continue;
      bool c = false;
      switch (n.status) {
        case NodeStatus::Contradictory: c = true; break;
        case NodeStatus::Expanded:
          c = std::all_of(n.children.begin(), n.children.end(),
                          [&](int k) { return node(k).closed; });
          break;
        case NodeStatus::Covered: c = node(target.at(n.id)).closed; break;
        default: break;
      }
      if (c) {
        n.closed = true;
        changed = true;
      }
    }
  }
}

std::vector<int> Tableau::expand(int id, Production p, std::vector<AnyTrace> children) {
  std::vector<int> ids;
  for (auto& c : children) ids.push_back(add_node(std::move(c), id));
  auto& n = mut(id);
  n.status = NodeStatus::Expanded;
  n.production = std::move(p);
  n.children = ids;
  return ids;
}

std::vector<int> Tableau::step(int id) {
  auto& n = mut(id);
  if (n.status != NodeStatus::Open) return {};
  if (contradictory(n.trace, sys_)) {
    n.status = NodeStatus::Contradictory;
    n.production = Production{Rule::ContradictionClose, {}};
    n.closed = true;
    return {};
  }
  if (try_cover(id)) return {};
  ++expanded_;
  if (std::holds_alternative<ConcurrentTrace>(node(id).trace)) return step_finite(id);
  return step_infinite(id);
}

std::vector<int> Tableau::step_finite(int id) {
  const auto t = std::get<ConcurrentTrace>(node(id).trace);
  const auto& sig = sys_.signature();
  const auto order = topological_events(t);
  const int next_id = static_cast<int>(nodes_.size()) + 1;

  auto split = [&]() -> std::optional<std::vector<int>> {
    for (std::size_t i = 0; i < order.size(); ++i) {
      for (std::size_t j = i + 1; j < order.size(); ++j) {
        const auto &a = order[i], &b = order[j];
        if (t.ordered(a, b)) continue;
        if (is_satisfiable(conj(t.event(a).label, t.event(b).label), sig)) continue;
        auto kids = order_split(t, a, b, sig);
        return expand(id, {Rule::OrderSplit, {{"first", a}, {"second", b}}},
                      {kids[0], kids[1]});
      }
    }
    return std::nullopt;
  };

  // Processes touched by events added during the search.
  std::set<std::string> root_ids;
  {
    int r = id;
    while (node(r).parent) r = *node(r).parent;
    for (const auto& e : std::get<ConcurrentTrace>(node(r).trace).events()) root_ids.insert(e.id);
  }
  std::set<std::string> busy;
  for (const auto& e : t.events()) {
    if (root_ids.count(e.id)) continue;
    if (const auto* g = sys_.find(e.transition))
      for (const auto& m : g->members) busy.insert(sys_.system().find_local(m)->process);
  }

  auto known = [&](const Atom& psi, const std::string& b) {
    Formula now = Formula::of(psi);
    Formula kept = conj(now, prime(now));
    for (const auto* l : t.incoming(b)) {
      if (!strictly_before(t, l->src, b, sig)) continue;
      if (implies(t.event(l->src).label, prime(now), sig) && implies(l->label, kept, sig))
        return true;
    }
    return false;
  };

  auto last_necessary = [&]() -> std::optional<std::vector<int>> {
    std::map<std::string, std::size_t> rank;
    for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i;
    for (const auto& b : order) {
      struct Cand {
        std::string pred;
        Atom psi;
        std::size_t establishing;
        bool shares;
        std::size_t position;
      };
      std::vector<Cand> cands;
      auto preds = t.incoming(b);
      std::sort(preds.begin(), preds.end(), [&](const CausalLink* x, const CausalLink* y) {
        return rank[x->src] < rank[y->src];
      });
      auto atoms = boundary_candidates(t.event(b).label, sig);
      for (std::size_t k = 0; k < atoms.size(); ++k) {
        const auto& psi = atoms[k];
        if (known(psi, b)) continue;
        for (const auto* l : preds) {
          if (!strictly_before(t, l->src, b, sig)) continue;
          if (is_satisfiable(conj(t.event(l->src).label, prime(Formula::of(psi))), sig)) continue;
          auto gs = establishers(sys_, psi);
          bool shares = false;
          for (const auto* g : gs)
            for (const auto& m : g->members)
              shares = shares || busy.count(sys_.system().find_local(m)->process);
          cands.push_back({l->src, psi, gs.size(), shares, k});
          break;
        }
      }
      if (cands.empty()) continue;
      auto best = cands.begin();
      if (options_.heuristic == Heuristic::Smart) {
        best = std::min_element(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
          return std::make_tuple(x.establishing, !x.shares, x.position) <
                 std::make_tuple(y.establishing, !y.shares, y.position);
        });
      }
      const auto fresh = fresh_id(next_id);
      Params params{{"pred", best->pred},
                    {"target", b},
                    {"predicate", to_string(best->psi)},
                    {"event", fresh}};
      try {
        auto itp = interpolate(post_state(t.event(best->pred).label, sig),
                               Formula::of(best->psi), sig);
        params["interpolant"] = to_string(itp);
      } catch (const LogicError&) {
      }
      auto child = last_necessary_event(t, best->pred, b, best->psi, fresh, sys_);
      return expand(id, {Rule::LastNecessaryEvent, params}, {child});
    }
    return std::nullopt;
  };

  auto necessary = [&]() -> std::optional<std::vector<int>> {
    for (const auto& l : t.links()) {
      const auto &a = l.src, &b = l.tgt;
      if (!strictly_before(t, a, b, sig)) continue;
      auto post = post_state(t.event(a).label, sig);
      auto pre = pre_state(t.event(b).label, sig);
      if (is_satisfiable(conj(post, pre), sig)) continue;
      bool bridged = false;
      for (const auto& x : t.events())
        bridged = bridged || (t.has_path(a, x.id) && t.has_path(x.id, b));
      if (bridged) continue;
      bool single = false;
      for (const auto& psi : boundary_candidates(t.event(b).label, sig))
        single = single ||
                 !is_satisfiable(conj(t.event(a).label, prime(Formula::of(psi))), sig);
      if (single) continue;
      Formula itp;
      try {
        itp = interpolate(post, pre, sig);
      } catch (const LogicError&) {
        continue;
      }
      if (itp.atoms().size() != 1) continue;
      const auto phi = itp.atoms().front();
      const auto fresh = fresh_id(next_id);
      try {
        auto child = necessary_event(t, a, b, phi, fresh, sys_);
        return expand(id,
                      {Rule::NecessaryEvent,
                       {{"from", a}, {"to", b}, {"predicate", to_string(phi)}, {"event", fresh}}},
                      {child});
      } catch (const RuleError&) {
        continue;
      }
    }
    return std::nullopt;
  };

  std::vector<std::function<std::optional<std::vector<int>>()>> rules;
  if (options_.heuristic == Heuristic::Smart)
    rules = {split, last_necessary, necessary};
  else
    rules = {last_necessary, necessary, split};
  for (auto& r : rules)
    if (auto kids = r()) return *kids;
  mut(id).status = NodeStatus::Stuck;
  return {};
}

std::vector<int> Tableau::step_infinite(int id) {
  const auto t = std::get<InfiniteTrace>(node(id).trace);
  const auto& sig = sys_.signature();
  const int next_id = static_cast<int>(nodes_.size()) + 1;
  std::vector<std::string> order;
  try {
    order = topological_events(t.cycle);
  } catch (const TraceError&) {
    mut(id).status = NodeStatus::Stuck;
    return {};
  }

  if (auto w = find_ranking(t, sys_)) {
    const auto fresh = fresh_id(next_id);
    auto kids = invariance_split(t, non_increase(w->variable), fresh, sys_);
    if (terminating(kids[0], *w, sys_)) {
      Params params{{"predicate", to_string(non_increase(w->variable))},
                    {"event", fresh},
                    {"variable", w->variable},
                    {"bound_event", w->bound_event},
                    {"decrease_event", w->decrease_event},
                    {"bound", std::to_string(w->bound)}};
      return expand(id, {Rule::InvarianceSplit, params}, {kids[1]});
    }
  }

  {
    std::optional<std::pair<std::size_t, std::string>> pick;
    for (const auto& e : order) {
      const auto& ev = t.cycle.event(e);
      if (!ev.transition.empty()) continue;
      auto n = candidate_transitions(sys_, conj(ev.label, t.invariant), false).size();
      if (!pick || n < pick->first) pick = std::make_pair(n, e);
    }
    if (pick) {
      std::vector<std::string> names;
      auto kids = instantiate_cycle(t, pick->second, sys_, &names);
      return expand(id,
                    {Rule::InstantiateCycle,
                     {{"event", pick->second}, {"transitions", join(names)}}},
                    {kids.begin(), kids.end()});
    }
  }

  for (const auto& e : order) {
    const auto& ev = t.cycle.event(e);
    if (ev.transition.empty()) continue;
    const auto pre = pre_state(ev.label, sig);
    for (const auto& a : pre.atoms()) {
      const auto* la = std::get_if<LocationAtom>(&a);
      if (!la || !la->equal || la->var.primed) continue;
      Formula phi = Formula::of(a);
      if (!implies(ev.label, prime(Formula::of(*negate(a))), sig)) continue;
      Formula back = conj(Formula::of(*negate(a)), prime(phi));
      bool restored = false;
      for (const auto& x : t.cycle.events())
        restored = restored || implies(conj(x.label, t.invariant), back, sig);
      if (restored) continue;
      auto gs = establishers(sys_, a);
      std::vector<std::string> fresh;
      for (std::size_t k = 0; k < gs.size(); ++k)
        fresh.push_back(fresh_id(next_id + static_cast<int>(k)));
      std::vector<std::string> names;
      auto kids = necessary_cycle_event(t, e, a, fresh, sys_, &names);
      return expand(id,
                    {Rule::NecessaryCycleEvent,
                     {{"event", e},
                      {"predicate", to_string(a)},
                      {"events", join(fresh)},
                      {"transitions", join(names)}}},
                    {kids.begin(), kids.end()});
    }
  }

  mut(id).status = NodeStatus::Stuck;
  return {};
}

Verdict Tableau::run() {
  const auto start = std::chrono::steady_clock::now();
  auto finish = [&](Verdict v) {
    elapsed_ms_ = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return v;
  };
  if (roots_.empty())
    for (auto& r : initial_roots(sys_, prop_)) roots_.push_back(add_node(std::move(r), std::nullopt));
  std::deque<int> work(roots_.begin(), roots_.end());
  propagate();
  std::vector<int> stuck;
  while (!work.empty() && !proven()) {
    if (nodes_.size() >= options_.max_nodes)
      return finish({VerdictKind::Unknown,
                     "budget: node limit of " + std::to_string(options_.max_nodes) + " reached",
                     std::nullopt});
    const int id = work.front();
    work.pop_front();
    if (node(id).status != NodeStatus::Open) continue;
    for (int k : step(id))
      if (node(k).status == NodeStatus::Open) work.push_back(k);
    propagate();
    if (node(id).status == NodeStatus::Stuck) {
      const auto h = options_.horizon ? options_.horizon : default_horizon(sys_, node(id).trace);
      if (auto w = realize_counterexample(sys_, node(id).trace, h, options_.realize_cap))
        return finish({VerdictKind::Violated,
                       "node " + std::to_string(id) + " is realized by a system run", w});
      stuck.push_back(id);
    }
  }
  if (proven()) return finish({VerdictKind::Proven, "all roots closed", std::nullopt});
  std::string ids;
  for (int s : stuck) ids += (ids.empty() ? "" : ", ") + std::to_string(s);
  return finish({VerdictKind::Unknown, "rule-gap: no rule applies to node(s) " + ids, std::nullopt});
}

std::optional<Run> realize_counterexample(const ComposedSystem& sys, const AnyTrace& trace,
                                          std::size_t horizon, std::size_t cap) {
  Explorer ex(sys);
  struct Item {
    ExplicitState state;
    std::size_t parent;
    std::string transition;
    std::size_t depth;
  };
  std::vector<Item> items{{ex.initial(), 0, "", 0}};
  auto path = [&](std::size_t i) {
    Run run;
    for (;;) {
      run.states.push_back(items[i].state);
      if (i == 0) break;
      run.transitions.push_back(items[i].transition);
      i = items[i].parent;
    }
    std::reverse(run.states.begin(), run.states.end());
    std::reverse(run.transitions.begin(), run.transitions.end());
    return run;
  };
  const auto* finite = std::get_if<ConcurrentTrace>(&trace);
  // Membership survives extension, so a run that was not a member before its
  // last step can only become one if that step hosts some event; and no run
  // is a member before every event has found a step somewhere.
  const std::size_t events = finite ? finite->events().size() : 0;
  if (finite && events == 0) return path(0);
  const bool track = events <= 64;
  const std::uint64_t all = events >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << events) - 1;
  std::vector<std::uint64_t> hosted{0};
  auto step_mask = [&](const ExplicitState& from, const ExplicitState& to) {
    std::uint64_t m = 0;
    const auto pre = ex.valuation(from), post = ex.valuation(to);
    for (std::size_t e = 0; e < events; ++e)
      if (eval(finite->events()[e].label, pre, post)) m |= std::uint64_t{1} << e;
    return m;
  };
  if (finite && track) hosted[0] = step_mask(items[0].state, items[0].state);  // the initial stutter
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (finite) {
      const std::uint64_t last =
          i == 0 ? hosted[0] : (track ? step_mask(items[items[i].parent].state, items[i].state) : 1);
      if (i > 0 && track) hosted[i] = hosted[items[i].parent] | last;
      if (!track || (last != 0 && hosted[i] == all)) {
        auto run = path(i);
        if (is_member(to_computation(ex, run), *finite)) return run;
      }
    } else {
      auto run = path(i);
      const auto& last = run.states.back();
      for (std::size_t k = 0; k + 1 < run.states.size(); ++k) {
        if (run.states[k] != last) continue;
        Run lasso;
        lasso.states.assign(run.states.begin(), run.states.end() - 1);
        lasso.transitions = run.transitions;
        lasso.loop_start = k;
        if (is_member_lasso(to_computation(ex, lasso), std::get<InfiniteTrace>(trace)))
          return lasso;
      }
    }
    if (items[i].depth >= horizon) continue;
    for (auto& [g, n] : ex.successors(items[i].state)) {
      if (items.size() >= cap) break;
      items.push_back({std::move(n), i, sys.transitions()[g].name, items[i].depth + 1});
      if (finite && track) hosted.push_back(0);
    }
  }
  return std::nullopt;
}

}  // namespace causal
