// Synchronized transition systems and their composition into global
// transition relations.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "causal/logic.hpp"

namespace causal {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IntegerVariable {
  std::string name;
  std::int64_t initial = 0;
  std::optional<std::int64_t> lower;
  std::optional<std::int64_t> upper;

  bool operator==(const IntegerVariable&) const = default;
};

struct Process {
  std::string name;
  std::vector<std::string> locations;
  std::string initial;

  bool operator==(const Process&) const = default;
};

/// Name of the location variable owned by a process.
std::string location_variable(const std::string& process);

/// `var := expr` where expr ranges over current integer variables.
struct Update {
  std::string var;
  LinearExpr expr;

  bool operator==(const Update&) const = default;
};

struct LocalTransition {
  std::string name;
  std::string process;
  std::string source;
  std::string target;
  Formula guard;
  std::vector<Update> updates;

  bool operator==(const LocalTransition&) const = default;
};

struct SyncVector {
  std::string name;
  std::vector<std::string> members;

  bool operator==(const SyncVector&) const = default;
};

struct TransitionSystem {
  std::string name;
  std::vector<IntegerVariable> integers;
  std::vector<Process> processes;
  std::vector<LocalTransition> locals;
  std::vector<SyncVector> syncs;  // empty: free interleaving

  const Process* find_process(const std::string& name) const;
  const LocalTransition* find_local(const std::string& name) const;
  const IntegerVariable* find_integer(const std::string& name) const;

  bool operator==(const TransitionSystem&) const = default;
};

/// Throws ModelError naming the first violated invariant.
void validate(const TransitionSystem& system);

Signature signature_of(const TransitionSystem& system);

/// Initial condition as a current-state predicate.
Formula initial_condition(const TransitionSystem& system);

struct GlobalTransition {
  std::string name;
  std::vector<std::string> members;  // local transition names
  Formula relation;
};

/// One global transition per sync vector (or per local transition under free
/// interleaving), in declaration order. Throws ModelError when a vector
/// updates a variable twice.
std::vector<GlobalTransition> compose(const TransitionSystem& system);

std::size_t transition_count(const TransitionSystem& system);

/// A validated system together with its composed transitions.
class ComposedSystem {
 public:
  explicit ComposedSystem(TransitionSystem system);

  const TransitionSystem& system() const { return system_; }
  const Signature& signature() const { return signature_; }
  const Formula& init() const { return init_; }
  const std::vector<GlobalTransition>& transitions() const { return transitions_; }
  const GlobalTransition* find(const std::string& name) const;

  /// Relation of the virtual step that starts every computation: it stutters
  /// on an initial state.
  const Formula& init_step() const { return init_transition_.relation; }
  /// The same step packaged as a transition named "init".
  const GlobalTransition& init_transition() const { return init_transition_; }

 private:
  TransitionSystem system_;
  Signature signature_;
  Formula init_;
  GlobalTransition init_transition_;
  std::vector<GlobalTransition> transitions_;
};

}  // namespace causal
