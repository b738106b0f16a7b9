// Proof search over trace tableaux: a forest of traces grown by transformer
// applications, closed by contradictions and coverings.

#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "causal/oracle.hpp"
#include "causal/transformers.hpp"

namespace causal {

struct PropertySpec {
  enum class Kind { ReachTransition, ReachPredicate, Termination, Violation };

  std::string name;
  Kind kind = Kind::Termination;
  std::string transition;  // ReachTransition
  Formula predicate;       // ReachPredicate, current-state
  std::vector<AnyTrace> patterns;  // Violation
};

/// Root traces encoding every violation of the property.
std::vector<AnyTrace> initial_roots(const ComposedSystem& sys, const PropertySpec& prop);

enum class Heuristic { Smart, Naive };

std::string heuristic_name(Heuristic h);

enum class NodeStatus { Open, Expanded, Contradictory, Covered, Stuck };

std::string status_name(NodeStatus s);

struct TableauNode {
  int id = 0;
  std::optional<int> parent;
  AnyTrace trace;
  NodeStatus status = NodeStatus::Open;
  /// Production applied to this node; its children are `children`.
  std::optional<Production> production;
  std::vector<int> children;
  bool closed = false;
};

struct Covering {
  int from = 0;
  int to = 0;
  EventMap mapping;
};

struct TableauOptions {
  Heuristic heuristic = Heuristic::Smart;
  std::size_t max_nodes = 20000;
  /// Realization search depth; 0 picks 3 x events x processes.
  std::size_t horizon = 0;
  std::size_t realize_cap = 200000;
};

enum class VerdictKind { Proven, Violated, Unknown };

std::string verdict_name(VerdictKind v);

struct Verdict {
  VerdictKind kind = VerdictKind::Unknown;
  std::string reason;
  std::optional<Run> witness;
};

class Tableau {
 public:
  Tableau(const ComposedSystem& sys, PropertySpec prop, TableauOptions options = {});

  Verdict run();

  /// Applies the first applicable action to an open node; returns new ids.
  std::vector<int> step(int id);
  std::optional<Covering> try_cover(int id);
  /// Installs a covering edge without searching (used by tests).
  void cover(int from, int to, EventMap mapping = {});
  /// Least fixpoint of closedness over children and coverings.
  void propagate();

  const ComposedSystem& system() const { return sys_; }
  const PropertySpec& property() const { return prop_; }
  const TableauOptions& options() const { return options_; }
  const std::vector<TableauNode>& nodes() const { return nodes_; }
  const TableauNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id - 1)); }
  const std::vector<Covering>& coverings() const { return coverings_; }
  const std::vector<int>& roots() const { return roots_; }
  std::size_t expanded() const { return expanded_; }
  double elapsed_ms() const { return elapsed_ms_; }
  bool proven() const;

  int add_node(AnyTrace trace, std::optional<int> parent);

 private:
  TableauNode& mut(int id) { return nodes_.at(static_cast<std::size_t>(id - 1)); }
  bool is_ancestor(int maybe_ancestor, int id) const;
  std::vector<int> expand(int id, Production p, std::vector<AnyTrace> children);
  std::vector<int> step_finite(int id);
  std::vector<int> step_infinite(int id);
  std::string fresh_id(int node, int k = 1) const;

  const ComposedSystem& sys_;
  PropertySpec prop_;
  TableauOptions options_;
  std::vector<TableauNode> nodes_;
  std::vector<Covering> coverings_;
  std::vector<int> roots_;
  std::size_t expanded_ = 0;
  double elapsed_ms_ = 0;
};

/// Bounded search for a system run (or lasso, for infinite traces) that is a
/// member of `trace`.
std::optional<Run> realize_counterexample(const ComposedSystem& sys, const AnyTrace& trace,
                                          std::size_t horizon, std::size_t cap = 200000);

/// 3 x events x processes.
std::size_t default_horizon(const ComposedSystem& sys, const AnyTrace& trace);

}  // namespace causal
