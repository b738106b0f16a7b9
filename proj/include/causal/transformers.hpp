// Trace transformers. Each rule validates its side conditions and returns the
// child traces; choosing where to apply a rule is the tableau's business.

#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "causal/model.hpp"
#include "causal/trace.hpp"

namespace causal {

/// Thrown when a rule's side conditions do not hold.
class RuleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Rule {
  OrderSplit,
  NecessaryEvent,
  LastNecessaryEvent,
  InvarianceSplit,
  InstantiateCycle,
  NecessaryCycleEvent,
  ContradictionClose,
  TerminatingClose,
};

std::string rule_name(Rule r);
std::optional<Rule> rule_from_name(const std::string& name);

using Params = std::map<std::string, std::string>;

struct Production {
  Rule rule;
  Params params;
};

using AnyTrace = std::variant<ConcurrentTrace, InfiniteTrace>;

std::string to_string(const AnyTrace& t);

/// Name of the pseudo transition that stutters on an initial state.
inline constexpr const char* kInitTransition = "init";

/// Transitions whose relation is compatible with `label`. Stem and finite
/// events may also be the initial stutter step; cycle events may not.
std::vector<const GlobalTransition*> candidate_transitions(const ComposedSystem& sys,
                                                           const Formula& label,
                                                           bool allow_init);

/// Relation of a named candidate, including the initial stutter step.
const Formula* relation_of(const ComposedSystem& sys, const std::string& transition);

// -- finite traces -----------------------------------------------------------

/// Both linearizations of two unordered events whose labels cannot share a
/// step. Each child gains the link and a conflict.
std::vector<ConcurrentTrace> order_split(const ConcurrentTrace& t, const std::string& a,
                                         const std::string& b, const Signature& sig);

/// Inserts `fresh` labeled phi & !phi' between strictly ordered a and b when
/// a establishes phi and b needs its negation.
ConcurrentTrace necessary_event(const ConcurrentTrace& t, const std::string& a,
                                const std::string& b, const Atom& phi,
                                const std::string& fresh, const ComposedSystem& sys);

/// b needs psi but p, strictly before b, ends with !psi: the last event that
/// establishes psi sits between them.
ConcurrentTrace last_necessary_event(const ConcurrentTrace& t, const std::string& p,
                                     const std::string& b, const Atom& psi,
                                     const std::string& fresh, const ComposedSystem& sys);

// -- infinite traces ---------------------------------------------------------

struct RankingWitness {
  std::string variable;
  std::string bound_event;
  std::string decrease_event;
  std::int64_t bound = 0;
};

/// [invariant child, violating child]. `phi` must have a single-atom negation.
std::vector<InfiniteTrace> invariance_split(const InfiniteTrace& t, const Atom& phi,
                                            const std::string& fresh,
                                            const ComposedSystem& sys);

/// One child per compatible transition, in declaration order.
std::vector<InfiniteTrace> instantiate_cycle(const InfiniteTrace& t, const std::string& event,
                                             const ComposedSystem& sys,
                                             std::vector<std::string>* names = nullptr);

/// Event leaves location phi; some transition must bring it back. One child
/// per re-establishing transition; fresh ids are taken in order.
std::vector<InfiniteTrace> necessary_cycle_event(const InfiniteTrace& t, const std::string& event,
                                                 const Atom& phi,
                                                 const std::vector<std::string>& fresh,
                                                 const ComposedSystem& sys,
                                                 std::vector<std::string>* names = nullptr);

/// Transitions that can re-establish `phi` (!phi & phi' compatible).
std::vector<const GlobalTransition*> establishers(const ComposedSystem& sys, const Atom& phi);

/// First witness in variable declaration order.
std::optional<RankingWitness> find_ranking(const InfiniteTrace& t, const ComposedSystem& sys);

/// The invariant `v' <= v` together with the witness rules out every lasso.
bool terminating(const InfiniteTrace& t, const RankingWitness& w, const ComposedSystem& sys);

/// Decreasing-variable atom `v' <= v` used by the ranking split.
Atom non_increase(const std::string& variable);

// -- closing -----------------------------------------------------------------

/// Unsatisfiable event label, an event no transition can realize, or a flag
/// set by the producing rule.
bool contradictory(const ConcurrentTrace& t, const ComposedSystem& sys);
bool contradictory(const InfiniteTrace& t, const ComposedSystem& sys);
bool contradictory(const AnyTrace& t, const ComposedSystem& sys);

}  // namespace causal
