// Test-side reference semantics: membership decided by trying every
// assignment of events to steps, plus random generators for traces and
// computations.

#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "causal/trace.hpp"

namespace reference {

using namespace causal;

inline bool holds_at(const Formula& f, const Computation& c, std::size_t step) {
  return eval(f, c.states[step], c.states[step + 1]);
}

// ∃ pos: every event label holds at its step; src ≤ tgt for every link and
// the link label holds strictly between; conflicting events differ. The
// contradictory flag is a claim about system runs and is ignored here.
inline bool member(const Computation& c, const ConcurrentTrace& t) {
  const auto& evs = t.events();
  const std::size_t steps = c.steps();
  std::vector<std::size_t> pos(evs.size());
  auto index = [&](const std::string& id) {
    for (std::size_t i = 0; i < evs.size(); ++i)
      if (evs[i].id == id) return i;
    return evs.size();
  };
  auto consistent = [&]() {
    for (const auto& l : t.links()) {
      auto s = pos[index(l.src)], g = pos[index(l.tgt)];
      if (s > g) return false;
      for (auto k = s + 1; k < g; ++k)
        if (!holds_at(l.label, c, k)) return false;
    }
    for (const auto& x : t.conflicts())
      if (pos[index(x.a)] == pos[index(x.b)]) return false;
    return true;
  };
  std::function<bool(std::size_t)> assign = [&](std::size_t i) {
    if (i == evs.size()) return consistent();
    for (std::size_t s = 0; s < steps; ++s) {
      if (!holds_at(evs[i].label, c, s)) continue;
      pos[i] = s;
      if (assign(i + 1)) return true;
    }
    return false;
  };
  return assign(0);
}

inline Signature small_signature() {
  Signature s;
  s.integers = {"x"};
  s.locations["loc_P"] = {"a", "b", "c"};
  return s;
}

inline Formula random_atom(std::mt19937& rng) {
  std::uniform_int_distribution<int> kind(0, 4), val(0, 3), loc(0, 2), coin(0, 1);
  const char* locs[] = {"a", "b", "c"};
  const bool primed = coin(rng);
  switch (kind(rng)) {
    case 0:
    case 1:
      return location_is("loc_P", locs[loc(rng)], primed, coin(rng));
    case 2:
      return compare(LinearExpr::variable({"x", primed}), coin(rng) ? Cmp::Le : Cmp::Ge,
                     LinearExpr::number(val(rng)));
    case 3:
      return compare(LinearExpr::variable({"x", primed}), Cmp::Eq, LinearExpr::number(val(rng)));
    default: {
      LinearExpr rhs = LinearExpr::variable({"x"});
      rhs += LinearExpr::number(coin(rng) ? 1 : -1);
      return compare(LinearExpr::variable({"x", true}), Cmp::Eq, rhs);
    }
  }
}

inline Formula random_label(std::mt19937& rng, int max_atoms) {
  std::uniform_int_distribution<int> n(0, max_atoms);
  Formula f;
  for (int i = n(rng); i > 0; --i) f = conj(f, random_atom(rng));
  return f;
}

inline ConcurrentTrace random_trace(std::mt19937& rng, int max_events) {
  std::uniform_int_distribution<int> count(1, max_events), pct(0, 99);
  ConcurrentTrace t;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) t.add_event({"e" + std::to_string(i), random_label(rng, 2), ""});
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const auto a = "e" + std::to_string(i), b = "e" + std::to_string(j);
      if (pct(rng) < 40) t.add_link(a, b, pct(rng) < 50 ? Formula::top() : random_label(rng, 1));
      if (pct(rng) < 25) t.add_conflict(a, b);
    }
  return t;
}

inline Computation random_computation(std::mt19937& rng, int max_steps) {
  std::uniform_int_distribution<int> steps(1, max_steps), val(0, 3), loc(0, 2);
  const char* locs[] = {"a", "b", "c"};
  Computation c;
  for (int i = steps(rng); i >= 0; --i)
    c.states.push_back({{"x", std::int64_t{val(rng)}}, {"loc_P", std::string(locs[loc(rng)])}});
  return c;
}

}  // namespace reference
