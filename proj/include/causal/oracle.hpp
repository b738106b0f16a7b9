// Explicit-state exploration: ground truth for small instances.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "causal/model.hpp"
#include "causal/trace.hpp"

namespace causal {

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Location indices of every process (declaration order) followed by the
/// integer values.
using ExplicitState = std::vector<std::int64_t>;

/// A run fires transitions[i] from states[i] to states[i+1]. For a lasso one
/// extra transition leads from the last state back to states[*loop_start].
struct Run {
  std::vector<ExplicitState> states;
  std::vector<std::string> transitions;
  std::optional<std::size_t> loop_start;

  bool is_lasso() const { return loop_start.has_value(); }
};

inline constexpr std::size_t kDefaultStateCap = 1'000'000;

/// Fires synchronized local transitions directly on explicit states,
/// independently of the composed relations.
class Explorer {
 public:
  explicit Explorer(const ComposedSystem& sys);

  const ComposedSystem& system() const { return sys_; }
  ExplicitState initial() const;
  /// Successors in transition declaration order. Throws OracleError when a
  /// successor leaves a declared integer range.
  std::vector<std::pair<std::size_t, ExplicitState>> successors(const ExplicitState& s) const;
  std::optional<ExplicitState> fire(const ExplicitState& s, std::size_t transition) const;
  Valuation valuation(const ExplicitState& s) const;
  std::string render(const ExplicitState& s) const;

 private:
  const ComposedSystem& sys_;
  std::vector<std::vector<const LocalTransition*>> members_;
};

std::vector<ExplicitState> enumerate_reachable(const ComposedSystem& sys,
                                               std::size_t cap = kDefaultStateCap);

/// Reachability target: a transition that fires, or a current-state predicate.
struct ReachTarget {
  std::string transition;
  Formula predicate;

  static ReachTarget fires(std::string name) { return {std::move(name), {}}; }
  static ReachTarget holds(Formula f) { return {"", std::move(f)}; }
};

/// Shortest witness run, if any.
std::optional<Run> check_reachability(const ComposedSystem& sys, const ReachTarget& target,
                                      std::size_t cap = kDefaultStateCap);

/// Nested depth-first search for a reachable cycle; returns a lasso.
std::optional<Run> check_termination(const ComposedSystem& sys,
                                     std::size_t cap = kDefaultStateCap);

/// Maximal runs up to `horizon` steps: runs of exactly that length plus
/// shorter ones that deadlock.
std::vector<Run> enumerate_runs(const ComposedSystem& sys, std::size_t horizon);

/// Every run of 0..horizon steps in depth-first order. Returning false from
/// the visitor stops the enumeration.
void for_each_run(const ComposedSystem& sys, std::size_t horizon,
                  const std::function<bool(const Run&)>& visit);

/// Every lasso whose prefix plus loop has at most `horizon` steps.
void for_each_lasso(const ComposedSystem& sys, std::size_t horizon,
                    const std::function<bool(const Run&)>& visit);

/// Checks a run against the explicit semantics; explains the first problem.
bool validate_run(const ComposedSystem& sys, const Run& run, std::string* problem = nullptr);

/// Valuation sequence with the initial stutter step prepended, the shape the
/// trace semantics expects for system runs.
Computation to_computation(const Explorer& ex, const Run& run);

}  // namespace causal
