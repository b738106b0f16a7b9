#include "causal/transformers.hpp"

#include <algorithm>

namespace causal {

namespace {

constexpr const char* kRuleNames[] = {
    "OrderSplit",       "NecessaryEvent",      "LastNecessaryEvent", "InvarianceSplit",
    "InstantiateCycle", "NecessaryCycleEvent", "ContradictionClose", "TerminatingClose",
};

void require(bool cond, const std::string& what) {
  if (!cond) throw RuleError(what);
}

bool state_atom(const Atom& a) {
  if (std::holds_alternative<FrameAtom>(a)) return false;
  for (const auto& v : vocabulary(a))
    if (v.primed) return false;
  return true;
}

bool strictly_before(const ConcurrentTrace& t, const std::string& a, const std::string& b,
                     const Signature& sig) {
  if (!t.has_path(a, b)) return false;
  return t.in_conflict(a, b) ||
         !is_satisfiable(conj(t.event(a).label, t.event(b).label), sig);
}

/// Commits an inserted event to its transition when only one fits; marks the
/// trace contradictory when none does.
void settle(ConcurrentTrace& t, const std::string& id, const ComposedSystem& sys) {
  auto& e = t.event(id);
  auto cands = candidate_transitions(sys, e.label, true);
  if (cands.empty()) {
    t.set_contradictory();
  } else if (cands.size() == 1) {
    e.label = conj(e.label, cands.front()->relation);
    e.transition = cands.front()->name;
  }
}

Formula atom_f(const Atom& a) { return Formula::of(a); }

Atom checked_negation(const Atom& a, const char* rule) {
  auto n = negate(a);
  require(n.has_value(), std::string(rule) + ": predicate " + to_string(a) +
                             " has no single-atom negation");
  return *n;
}

}  // namespace

std::string rule_name(Rule r) { return kRuleNames[static_cast<int>(r)]; }

std::optional<Rule> rule_from_name(const std::string& name) {
  for (int i = 0; i < 8; ++i)
    if (name == kRuleNames[i]) return static_cast<Rule>(i);
  return std::nullopt;
}

std::string to_string(const AnyTrace& t) {
  return std::visit([](const auto& x) { return to_string(x); }, t);
}

std::vector<const GlobalTransition*> candidate_transitions(const ComposedSystem& sys,
                                                           const Formula& label,
                                                           bool allow_init) {
  std::vector<const GlobalTransition*> out;
  if (label.is_false()) return out;
  if (allow_init && is_satisfiable(conj(label, sys.init_step()), sys.signature()))
    out.push_back(&sys.init_transition());
  for (const auto& g : sys.transitions())
    if (is_satisfiable(conj(label, g.relation), sys.signature())) out.push_back(&g);
  return out;
}

const Formula* relation_of(const ComposedSystem& sys, const std::string& transition) {
  if (transition == kInitTransition) return &sys.init_step();
  const auto* g = sys.find(transition);
  return g ? &g->relation : nullptr;
}

std::vector<ConcurrentTrace> order_split(const ConcurrentTrace& t, const std::string& a,
                                         const std::string& b, const Signature& sig) {
  require(a != b && t.has_event(a) && t.has_event(b), "OrderSplit: unknown events");
  require(!t.ordered(a, b), "OrderSplit: " + a + " and " + b + " are already ordered");
  require(!is_satisfiable(conj(t.event(a).label, t.event(b).label), sig),
          "OrderSplit: " + a + " and " + b + " may share a step");
  std::vector<ConcurrentTrace> out(2, t);
  out[0].add_link(a, b);
  out[1].add_link(b, a);
  for (auto& c : out) c.add_conflict(a, b);
  return out;
}

ConcurrentTrace necessary_event(const ConcurrentTrace& t, const std::string& a,
                                const std::string& b, const Atom& phi,
                                const std::string& fresh, const ComposedSystem& sys) {
  const auto& sig = sys.signature();
  require(t.has_event(a) && t.has_event(b), "NecessaryEvent: unknown events");
  require(!t.has_event(fresh), "NecessaryEvent: id " + fresh + " is taken");
  require(state_atom(phi), "NecessaryEvent: predicate must be a state atom");
  require(strictly_before(t, a, b, sig), "NecessaryEvent: " + a + " is not strictly before " + b);
  auto neg = checked_negation(phi, "NecessaryEvent");
  require(implies(t.event(a).label, prime(atom_f(phi)), sig),
          "NecessaryEvent: " + a + " does not establish " + to_string(phi));
  require(implies(t.event(b).label, atom_f(neg), sig),
          "NecessaryEvent: " + b + " does not require " + to_string(neg));
  ConcurrentTrace child = t;
  child.add_event({fresh, conj(atom_f(phi), prime(atom_f(neg))), ""});
  child.add_link(a, fresh);
  child.add_link(fresh, b);
  child.add_conflict(a, fresh);
  child.add_conflict(fresh, b);
  settle(child, fresh, sys);
  return child;
}

ConcurrentTrace last_necessary_event(const ConcurrentTrace& t, const std::string& p,
                                     const std::string& b, const Atom& psi,
                                     const std::string& fresh, const ComposedSystem& sys) {
  const auto& sig = sys.signature();
  require(t.has_event(p) && t.has_event(b), "LastNecessaryEvent: unknown events");
  require(!t.has_event(fresh), "LastNecessaryEvent: id " + fresh + " is taken");
  require(state_atom(psi), "LastNecessaryEvent: predicate must be a state atom");
  require(strictly_before(t, p, b, sig),
          "LastNecessaryEvent: " + p + " is not strictly before " + b);
  auto neg = checked_negation(psi, "LastNecessaryEvent");
  require(implies(t.event(b).label, atom_f(psi), sig),
          "LastNecessaryEvent: " + b + " does not require " + to_string(psi));
  require(!is_satisfiable(conj(t.event(p).label, prime(atom_f(psi))), sig),
          "LastNecessaryEvent: " + p + " may already establish " + to_string(psi));
  ConcurrentTrace child = t;
  child.add_event({fresh, conj(atom_f(neg), prime(atom_f(psi))), ""});
  child.add_link(p, fresh);
  child.add_link(fresh, b, conj(atom_f(psi), prime(atom_f(psi))));
  child.add_conflict(p, fresh);
  child.add_conflict(fresh, b);
  settle(child, fresh, sys);
  return child;
}

std::vector<InfiniteTrace> invariance_split(const InfiniteTrace& t, const Atom& phi,
                                            const std::string& fresh,
                                            const ComposedSystem& sys) {
  (void)sys;
  require(!t.cycle.has_event(fresh) && !t.stem.has_event(fresh),
          "InvarianceSplit: id " + fresh + " is taken");
  auto neg = checked_negation(phi, "InvarianceSplit");
  InfiniteTrace keep = t;
  keep.invariant = conj(keep.invariant, atom_f(phi));
  InfiniteTrace leave = t;
  leave.cycle.add_event({fresh, atom_f(neg), ""});
  return {keep, leave};
}

std::vector<InfiniteTrace> instantiate_cycle(const InfiniteTrace& t, const std::string& event,
                                             const ComposedSystem& sys,
                                             std::vector<std::string>* names) {
  const auto* e = t.cycle.find_event(event);
  require(e != nullptr, "InstantiateCycle: no cycle event " + event);
  require(e->transition.empty(), "InstantiateCycle: " + event + " is already concrete");
  std::vector<InfiniteTrace> out;
  if (names) names->clear();
  for (const auto* g : candidate_transitions(sys, conj(e->label, t.invariant), false)) {
    InfiniteTrace child = t;
    auto& ce = child.cycle.event(event);
    ce.label = conj(ce.label, g->relation);
    ce.transition = g->name;
    out.push_back(std::move(child));
    if (names) names->push_back(g->name);
  }
  return out;
}

std::vector<const GlobalTransition*> establishers(const ComposedSystem& sys, const Atom& phi) {
  auto neg = negate(phi);
  if (!neg) return {};
  Formula change = conj(atom_f(*neg), prime(atom_f(phi)));
  std::vector<const GlobalTransition*> out;
  for (const auto& g : sys.transitions())
    if (is_satisfiable(conj(change, g.relation), sys.signature())) out.push_back(&g);
  return out;
}

std::vector<InfiniteTrace> necessary_cycle_event(const InfiniteTrace& t, const std::string& event,
                                                 const Atom& phi,
                                                 const std::vector<std::string>& fresh,
                                                 const ComposedSystem& sys,
                                                 std::vector<std::string>* names) {
  const auto& sig = sys.signature();
  const auto* e = t.cycle.find_event(event);
  require(e != nullptr, "NecessaryCycleEvent: no cycle event " + event);
  require(!e->transition.empty(), "NecessaryCycleEvent: " + event + " is abstract");
  require(state_atom(phi), "NecessaryCycleEvent: predicate must be a state atom");
  auto neg = checked_negation(phi, "NecessaryCycleEvent");
  require(implies(e->label, atom_f(phi), sig) && implies(e->label, prime(atom_f(neg)), sig),
          "NecessaryCycleEvent: " + event + " does not consume " + to_string(phi));
  auto gs = establishers(sys, phi);
  require(fresh.size() == gs.size(), "NecessaryCycleEvent: expected " +
                                         std::to_string(gs.size()) + " fresh ids");
  Formula change = conj(atom_f(neg), prime(atom_f(phi)));
  std::vector<InfiniteTrace> out;
  if (names) names->clear();
  for (std::size_t i = 0; i < gs.size(); ++i) {
    require(!t.cycle.has_event(fresh[i]) && !t.stem.has_event(fresh[i]),
            "NecessaryCycleEvent: id " + fresh[i] + " is taken");
    InfiniteTrace child = t;
    child.cycle.add_event({fresh[i], conj(change, gs[i]->relation), gs[i]->name});
    child.cycle.add_link(fresh[i], event);
    out.push_back(std::move(child));
    if (names) names->push_back(gs[i]->name);
  }
  return out;
}

Atom non_increase(const std::string& variable) {
  auto f = compare(LinearExpr::variable(Var{variable, true}), Cmp::Le,
                   LinearExpr::variable(Var{variable}));
  return f.atoms().front();
}

namespace {

Formula decrease(const std::string& v) {
  return compare(LinearExpr::variable(Var{v, true}), Cmp::Lt, LinearExpr::variable(Var{v}));
}

Formula increase(const std::string& v) {
  return compare(LinearExpr::variable(Var{v, true}), Cmp::Gt, LinearExpr::variable(Var{v}));
}

std::optional<std::int64_t> lower_bound(const Formula& label, const std::string& v,
                                        const Signature& sig) {
  Var cur{v};
  auto proj = project(label, [&](const Var& x) { return x == cur; }, sig);
  if (proj.is_false()) return std::nullopt;
  for (const auto& a : proj.atoms()) {
    const auto* li = std::get_if<LinearAtom>(&a);
    if (!li || li->terms.size() != 1 || li->terms[0].second != 1) continue;
    if (li->rel == Rel::Ge || li->rel == Rel::Eq) return li->bound;
  }
  return std::nullopt;
}

}  // namespace

std::optional<RankingWitness> find_ranking(const InfiniteTrace& t, const ComposedSystem& sys) {
  const auto& sig = sys.signature();
  std::vector<std::string> order;
  try {
    order = topological_events(t.cycle);
  } catch (const TraceError&) {
    return std::nullopt;
  }
  for (const auto& iv : sys.system().integers) {
    const auto& v = iv.name;
    if (implies(t.invariant, atom_f(non_increase(v)), sig)) continue;
    bool increases = false;
    std::optional<std::pair<std::string, std::int64_t>> bound;
    std::optional<std::string> dec;
    for (const auto& id : order) {
      Formula label = conj(t.cycle.event(id).label, t.invariant);
      if (implies(label, increase(v), sig)) {
        increases = true;
        break;
      }
      if (!bound)
        if (auto b = lower_bound(label, v, sig)) bound = std::make_pair(id, *b);
      if (!dec && implies(label, decrease(v), sig)) dec = id;
    }
    if (increases || !bound || !dec) continue;
    return RankingWitness{v, bound->first, *dec, bound->second};
  }
  return std::nullopt;
}

bool terminating(const InfiniteTrace& t, const RankingWitness& w, const ComposedSystem& sys) {
  const auto& sig = sys.signature();
  if (!sys.system().find_integer(w.variable)) return false;
  const auto* b = t.cycle.find_event(w.bound_event);
  const auto* d = t.cycle.find_event(w.decrease_event);
  if (!b || !d) return false;
  if (!implies(t.invariant, atom_f(non_increase(w.variable)), sig)) return false;
  auto at_least = compare(LinearExpr::variable(Var{w.variable}), Cmp::Ge,
                          LinearExpr::number(w.bound));
  return implies(conj(b->label, t.invariant), at_least, sig) &&
         implies(conj(d->label, t.invariant), decrease(w.variable), sig);
}

bool contradictory(const ConcurrentTrace& t, const ComposedSystem& sys) {
  if (t.contradictory()) return true;
  for (const auto& e : t.events()) {
    if (!is_satisfiable(e.label, sys.signature())) return true;
    if (candidate_transitions(sys, e.label, true).empty()) return true;
  }
  return false;
}

bool contradictory(const InfiniteTrace& t, const ComposedSystem& sys) {
  if (t.contradictory || t.stem.contradictory() || t.cycle.contradictory()) return true;
  if (contradictory(t.stem, sys)) return true;
  for (const auto& e : t.cycle.events()) {
    Formula label = conj(e.label, t.invariant);
    if (!is_satisfiable(label, sys.signature())) return true;
    if (candidate_transitions(sys, label, false).empty()) return true;
  }
  return false;
}

bool contradictory(const AnyTrace& t, const ComposedSystem& sys) {
  return std::visit([&](const auto& x) { return contradictory(x, sys); }, t);
}

}  // namespace causal
