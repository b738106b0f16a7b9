// Conjunctive label logic: location literals, location frames and linear
// integer constraints over current and primed variables.

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace causal {

class LogicError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A variable occurrence; `primed` refers to the post-state of a step.
struct Var {
  std::string name;
  bool primed = false;

  auto operator<=>(const Var&) const = default;
};

/// `var = location` or `var != location`.
struct LocationAtom {
  Var var;
  bool equal = true;
  std::string location;

  auto operator<=>(const LocationAtom&) const = default;
};

/// `var' = var` for a location variable.
struct FrameAtom {
  std::string var;

  auto operator<=>(const FrameAtom&) const = default;
};

enum class Rel { Le, Eq, Ge };

/// Sum of coefficient * variable compared against an integer bound. Always
/// held in normal form: terms sorted, no zero coefficients, gcd-reduced, and
/// the leading coefficient (first primed term, else first term) positive.
struct LinearAtom {
  std::vector<std::pair<Var, std::int64_t>> terms;
  Rel rel = Rel::Le;
  std::int64_t bound = 0;

  auto operator<=>(const LinearAtom&) const = default;
};

using Atom = std::variant<LocationAtom, FrameAtom, LinearAtom>;

/// Linear expression used to build atoms: sum of terms plus a constant.
struct LinearExpr {
  std::map<Var, std::int64_t> terms;
  std::int64_t constant = 0;

  static LinearExpr variable(Var v, std::int64_t coeff = 1);
  static LinearExpr number(std::int64_t k);
  LinearExpr& operator+=(const LinearExpr& other);
  LinearExpr& operator-=(const LinearExpr& other);
  LinearExpr scaled(std::int64_t k) const;

  bool operator==(const LinearExpr&) const = default;
};

enum class Cmp { Lt, Le, Eq, Ge, Gt, Ne };

/// Conjunction of atoms in canonical order. The constant false is a single
/// marker without atoms; the empty conjunction is true.
class Formula {
 public:
  Formula() = default;
  explicit Formula(std::vector<Atom> atoms);

  static Formula top() { return Formula(); }
  static Formula bottom();
  static Formula of(Atom atom);

  bool is_true() const { return !false_ && atoms_.empty(); }
  bool is_false() const { return false_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  bool contains(const Atom& atom) const;

  auto operator<=>(const Formula&) const = default;

 private:
  bool false_ = false;
  std::vector<Atom> atoms_;
};

Formula conj(const Formula& a, const Formula& b);
Formula conj(const Formula& a, const Atom& b);

/// Builds `lhs cmp rhs` as a formula: true, false, or a single normalized
/// linear atom. `Ne` is rejected since it is not conjunctive.
Formula compare(const LinearExpr& lhs, Cmp cmp, const LinearExpr& rhs);
Formula location_is(const std::string& var, const std::string& location,
                    bool primed = false, bool equal = true);
Formula location_frame(const std::string& var);

/// Location variables with their finite domains and the integer variables.
struct Signature {
  std::map<std::string, std::vector<std::string>> locations;
  std::set<std::string> integers;

  bool is_location(const std::string& name) const {
    return locations.count(name) != 0;
  }
};

enum class SatResult { Unsat, Sat, Unknown };

/// Location propagation plus Fourier-Motzkin with integer tightening and a
/// bounded integer witness search. `Unknown` only arises when the rational
/// relaxation is feasible but no integer witness was found in the budget.
SatResult check_sat(const Formula& f, const Signature& sig = {});

/// Unknown counts as satisfiable: never unsound when used to close proofs.
bool is_satisfiable(const Formula& f, const Signature& sig = {});

bool implies(const Formula& a, const Formula& b, const Signature& sig = {});

/// Delete-based minimal unsatisfiable subset. Throws LogicError when the
/// conjunction is satisfiable.
std::vector<Atom> unsat_core(const std::vector<Atom>& atoms,
                             const Signature& sig = {});

/// Craig interpolant of an unsatisfiable pair. Throws LogicError when a & b
/// is satisfiable or no interpolant can be constructed.
Formula interpolate(const Formula& a, const Formula& b,
                    const Signature& sig = {});

/// The three interpolant postconditions.
bool is_interpolant(const Formula& a, const Formula& b, const Formula& itp,
                    const Signature& sig = {});

using InterpolationObserver =
    std::function<void(const Formula&, const Formula&, const Formula&)>;

/// Installs a per-thread hook that sees every (a, b, interpolant) triple.
/// Passing an empty function removes it.
void set_interpolation_observer(InterpolationObserver observer);

/// Eliminates every variable for which `keep` returns false. Exact over the
/// rationals, an over-approximation of the integer projection.
Formula project(const Formula& f, const std::function<bool(const Var&)>& keep,
                const Signature& sig = {});

/// Current-state part of a transition predicate.
Formula pre_state(const Formula& f, const Signature& sig = {});
/// Primed part of a transition predicate, renamed to current variables.
Formula post_state(const Formula& f, const Signature& sig = {});

/// Renames every current variable to its primed copy. Throws if the formula
/// already mentions primed variables.
Formula prime(const Formula& f);
/// Renames primed variables to current ones. Throws on current variables.
Formula unprime(const Formula& f);

/// The single-atom negation, when it exists in the fragment.
std::optional<Atom> negate(const Atom& atom);
/// Disjuncts of the negation of an atom.
std::vector<Formula> negation_cases(const Atom& atom, const Signature& sig);

std::set<Var> vocabulary(const Formula& f);
std::set<Var> vocabulary(const Atom& a);

using Value = std::variant<std::int64_t, std::string>;
using Valuation = std::map<std::string, Value>;

/// Reads current variables from `pre`, primed ones from `post`. Throws
/// LogicError when a variable is missing or has the wrong kind.
bool eval(const Formula& f, const Valuation& pre, const Valuation& post);
bool eval(const Atom& a, const Valuation& pre, const Valuation& post);

std::string to_string(const Var& v);
std::string to_string(const Atom& a);
std::string to_string(const Formula& f);

}  // namespace causal
