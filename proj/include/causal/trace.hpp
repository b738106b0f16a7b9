// Concurrent traces: events labeled by transition predicates, causal links
// carrying preservation labels, and conflicts.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "causal/logic.hpp"

namespace causal {

class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Event {
  std::string id;
  Formula label;
  /// Global transition this event was instantiated with; empty when abstract.
  std::string transition;

  bool operator==(const Event&) const = default;
};

struct CausalLink {
  std::string src;
  std::string tgt;
  Formula label;

  bool operator==(const CausalLink&) const = default;
};

/// Unordered pair, stored with a < b.
struct Conflict {
  std::string a;
  std::string b;

  bool operator==(const Conflict&) const = default;
};

class ConcurrentTrace {
 public:
  const std::vector<Event>& events() const { return events_; }
  const std::vector<CausalLink>& links() const { return links_; }
  const std::vector<Conflict>& conflicts() const { return conflicts_; }
  bool contradictory() const { return contradictory_; }
  void set_contradictory(bool v = true) { contradictory_ = v; }
  bool empty() const { return events_.empty(); }

  /// Adds or replaces the event with this id.
  void add_event(Event e);
  Event& event(const std::string& id);
  const Event& event(const std::string& id) const;
  const Event* find_event(const std::string& id) const;
  bool has_event(const std::string& id) const { return find_event(id) != nullptr; }

  /// Adds a link; an existing link between the same events has its label
  /// strengthened. Links and conflicts must name existing events.
  void add_link(const std::string& src, const std::string& tgt, Formula label = {});
  const CausalLink* find_link(const std::string& src, const std::string& tgt) const;
  void add_conflict(const std::string& a, const std::string& b);
  bool in_conflict(const std::string& a, const std::string& b) const;

  /// True when a chain of links leads from `from` to `to` (length >= 1).
  bool has_path(const std::string& from, const std::string& to) const;
  bool ordered(const std::string& a, const std::string& b) const {
    return has_path(a, b) || has_path(b, a);
  }
  std::vector<const CausalLink*> incoming(const std::string& id) const;

  bool operator==(const ConcurrentTrace&) const = default;

 private:
  std::vector<Event> events_;        // sorted by id
  std::vector<CausalLink> links_;    // sorted by (src, tgt)
  std::vector<Conflict> conflicts_;  // sorted
  bool contradictory_ = false;
};

/// A stem that occurs once followed by a cycle that recurs forever. Every step
/// of the recurring part satisfies `invariant`.
struct InfiniteTrace {
  ConcurrentTrace stem;
  ConcurrentTrace cycle;
  Formula invariant;
  bool contradictory = false;

  bool operator==(const InfiniteTrace&) const = default;
};

/// Finite sequence of states; `loop_start` marks a lasso whose last state
/// steps back to states[*loop_start].
struct Computation {
  std::vector<Valuation> states;
  std::optional<std::size_t> loop_start;

  std::size_t steps() const { return states.empty() ? 0 : states.size() - 1; }
};

/// Structural invariants: endpoints exist, no self links, acyclic links,
/// conflicts between distinct existing events. Problems go to `diagnostics`.
bool well_formed(const ConcurrentTrace& t, std::vector<std::string>* diagnostics = nullptr);

/// Deterministic topological order, ties broken by event id with digit runs
/// compared numerically. Throws TraceError when the links contain a cycle.
std::vector<std::string> topological_events(const ConcurrentTrace& t);

/// Some assignment of events to steps satisfies labels, link order and
/// between-labels, and conflict distinctness.
bool is_member(const Computation& c, const ConcurrentTrace& t);

/// Lasso membership: the stem embeds into the prefix followed by enough loop
/// copies, the cycle embeds into |cycle|+1 consecutive loop copies, and
/// every loop step satisfies the invariant.
bool is_member_lasso(const Computation& c, const InfiniteTrace& t);

/// Injective event map under which big's constraints imply small's.
using EventMap = std::map<std::string, std::string>;
std::optional<EventMap> embed(const ConcurrentTrace& small, const ConcurrentTrace& big,
                              const Signature& sig = {});
std::optional<EventMap> embed(const InfiniteTrace& small, const InfiniteTrace& big,
                              const Signature& sig = {});

std::string to_string(const ConcurrentTrace& t);
std::string to_string(const InfiniteTrace& t);

}  // namespace causal
