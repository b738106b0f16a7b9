#include "causal/logic.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>
#include <sstream>

namespace causal {

namespace {

using i128 = __int128;

struct Overflow {};

std::int64_t checked(i128 v) {
  if (v > INT64_MAX || v < INT64_MIN) throw Overflow{};
  return static_cast<std::int64_t>(v);
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
  return -floor_div(-a, b);
}

thread_local InterpolationObserver g_observer;

// Normal form for sum(terms) rel bound. Returns nullopt for constant true,
// and sets `is_false` for constant false.
std::optional<LinearAtom> normalize(std::map<Var, std::int64_t> terms, Rel rel,
                                    std::int64_t bound, bool& is_false) {
  is_false = false;
  std::erase_if(terms, [](const auto& kv) { return kv.second == 0; });
  if (terms.empty()) {
    bool holds = rel == Rel::Le ? 0 <= bound
                 : rel == Rel::Ge ? 0 >= bound
                                  : bound == 0;
    is_false = !holds;
    return std::nullopt;
  }
  std::int64_t g = 0;
  for (const auto& [v, c] : terms) g = std::gcd(g, c < 0 ? -c : c);
  switch (rel) {
    case Rel::Le: bound = floor_div(bound, g); break;
    case Rel::Ge: bound = ceil_div(bound, g); break;
    case Rel::Eq:
      if (bound % g != 0) {
        is_false = true;
        return std::nullopt;
      }
      bound /= g;
      break;
  }
  LinearAtom atom;
  for (const auto& [v, c] : terms) atom.terms.emplace_back(v, c / g);
  auto lead = std::find_if(atom.terms.begin(), atom.terms.end(),
                           [](const auto& t) { return t.first.primed; });
  if (lead == atom.terms.end()) lead = atom.terms.begin();
  if (lead->second < 0) {
    for (auto& t : atom.terms) t.second = -t.second;
    bound = -bound;
    if (rel == Rel::Le) rel = Rel::Ge;
    else if (rel == Rel::Ge) rel = Rel::Le;
  }
  atom.rel = rel;
  atom.bound = bound;
  return atom;
}

// ---------------------------------------------------------------------------
// Location reasoning

struct LocationClass {
  std::vector<std::string> members;  // "v" or "v'"
  std::set<std::string> eq;
  std::set<std::string> neq;
};

std::string key_of(const Var& v) { return v.primed ? v.name + "'" : v.name; }

struct LocationState {
  std::map<std::string, std::string> parent;
  std::map<std::string, std::string> base;  // key -> variable name

  std::string find(const std::string& k) {
    auto it = parent.find(k);
    if (it == parent.end()) {
      parent[k] = k;
      return k;
    }
    if (it->second == k) return k;
    std::string root = find(it->second);
    parent[k] = root;
    return root;
  }
  void add(const Var& v) {
    base[key_of(v)] = v.name;
    find(key_of(v));
  }
  void unite(const std::string& a, const std::string& b) {
    auto ra = find(a), rb = find(b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
};

// Groups the location atoms of `f` into frame-connected classes.
std::map<std::string, LocationClass> location_classes(const Formula& f) {
  LocationState st;
  for (const auto& a : f.atoms()) {
    if (const auto* la = std::get_if<LocationAtom>(&a)) {
      st.add(la->var);
    } else if (const auto* fa = std::get_if<FrameAtom>(&a)) {
      st.add(Var{fa->var, false});
      st.add(Var{fa->var, true});
      st.unite(fa->var, fa->var + "'");
    }
  }
  std::map<std::string, LocationClass> classes;
  for (const auto& [k, name] : st.base) classes[st.find(k)].members.push_back(k);
  for (const auto& a : f.atoms()) {
    if (const auto* la = std::get_if<LocationAtom>(&a)) {
      auto& c = classes[st.find(key_of(la->var))];
      (la->equal ? c.eq : c.neq).insert(la->location);
    }
  }
  return classes;
}

std::string base_name(const std::string& key) {
  return key.back() == '\'' ? key.substr(0, key.size() - 1) : key;
}

const std::vector<std::string>* domain_of(const LocationClass& c,
                                          const Signature& sig) {
  auto it = sig.locations.find(base_name(c.members.front()));
  return it == sig.locations.end() ? nullptr : &it->second;
}

bool class_consistent(const LocationClass& c, const Signature& sig) {
  if (c.eq.size() > 1) return false;
  const auto* dom = domain_of(c, sig);
  if (!c.eq.empty()) {
    const auto& v = *c.eq.begin();
    if (c.neq.count(v)) return false;
    if (dom && std::find(dom->begin(), dom->end(), v) == dom->end())
      return false;
    return true;
  }
  if (dom) {
    return std::any_of(dom->begin(), dom->end(),
                       [&](const auto& l) { return !c.neq.count(l); });
  }
  return true;
}

// ---------------------------------------------------------------------------
// Fourier-Motzkin over indexed variables.

struct Row {
  std::vector<std::int64_t> a;
  std::int64_t b = 0;  // sum a_i x_i (<= | =) b
};

enum class RowKind { Trivial, Contradiction, Normal };

RowKind normalize_le(Row& r) {
  std::int64_t g = 0;
  for (auto c : r.a) g = std::gcd(g, c < 0 ? -c : c);
  if (g == 0) return r.b >= 0 ? RowKind::Trivial : RowKind::Contradiction;
  if (g > 1) {
    for (auto& c : r.a) c /= g;
    r.b = floor_div(r.b, g);
  }
  return RowKind::Normal;
}

RowKind normalize_eq(Row& r) {
  std::int64_t g = 0;
  for (auto c : r.a) g = std::gcd(g, c < 0 ? -c : c);
  if (g == 0) return r.b == 0 ? RowKind::Trivial : RowKind::Contradiction;
  if (r.b % g != 0) return RowKind::Contradiction;
  if (g > 1) {
    for (auto& c : r.a) c /= g;
    r.b /= g;
  }
  return RowKind::Normal;
}

// r := r - factor * e
void subtract(Row& r, const Row& e, std::int64_t factor) {
  for (std::size_t i = 0; i < r.a.size(); ++i)
    r.a[i] = checked(static_cast<i128>(r.a[i]) - static_cast<i128>(factor) * e.a[i]);
  r.b = checked(static_cast<i128>(r.b) - static_cast<i128>(factor) * e.b);
}

struct Substitution {
  std::size_t var;
  Row row;  // equality with unit coefficient on var
};

struct Stage {
  std::size_t var;
  std::vector<Row> rows;  // rows mentioning var when it was eliminated
};

struct Elimination {
  bool contradiction = false;
  std::vector<Row> le;
  std::vector<Row> eq;  // equalities over kept variables only
  std::vector<Substitution> subs;
  std::vector<Stage> stages;
};

constexpr std::size_t kRowLimit = 4000;

Elimination eliminate(std::size_t n, std::vector<Row> le, std::vector<Row> eq,
                      const std::vector<bool>& elim) {
  Elimination out;
  // Equalities: substitute unit-coefficient eliminable variables.
  for (;;) {
    bool progressed = false;
    for (std::size_t i = 0; i < eq.size(); ++i) {
      auto kind = normalize_eq(eq[i]);
      if (kind == RowKind::Contradiction) {
        out.contradiction = true;
        return out;
      }
      if (kind == RowKind::Trivial) {
        eq.erase(eq.begin() + static_cast<std::ptrdiff_t>(i));
        progressed = true;
        break;
      }
      std::optional<std::size_t> pivot;
      for (std::size_t k = 0; k < n; ++k) {
        if (elim[k] && (eq[i].a[k] == 1 || eq[i].a[k] == -1)) {
          pivot = k;
          break;
        }
      }
      if (!pivot) continue;
      Row e = eq[i];
      eq.erase(eq.begin() + static_cast<std::ptrdiff_t>(i));
      std::size_t k = *pivot;
      for (auto& r : eq)
        if (r.a[k] != 0) subtract(r, e, r.a[k] * e.a[k]);
      for (auto& r : le)
        if (r.a[k] != 0) subtract(r, e, r.a[k] * e.a[k]);
      out.subs.push_back({k, std::move(e)});
      progressed = true;
      break;
    }
    if (!progressed) break;
  }
  for (auto& r : eq) {
    bool touches = false;
    for (std::size_t k = 0; k < n; ++k) touches |= elim[k] && r.a[k] != 0;
    if (touches) {
      le.push_back(r);
      Row neg = r;
      for (auto& c : neg.a) c = -c;
      neg.b = -neg.b;
      le.push_back(std::move(neg));
    } else {
      out.eq.push_back(r);
    }
  }

  auto tidy = [&](std::vector<Row>& rows) -> bool {
    std::map<std::vector<std::int64_t>, std::int64_t> best;
    for (auto& r : rows) {
      auto kind = normalize_le(r);
      if (kind == RowKind::Contradiction) return false;
      if (kind == RowKind::Trivial) continue;
      auto [it, fresh] = best.emplace(r.a, r.b);
      if (!fresh) it->second = std::min(it->second, r.b);
    }
    rows.clear();
    for (auto& [a, b] : best) {
      std::vector<std::int64_t> neg(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) neg[i] = -a[i];
      auto it = best.find(neg);
      if (it != best.end() && static_cast<i128>(b) + it->second < 0) return false;
      rows.push_back({a, b});
    }
    return true;
  };

  if (!tidy(le)) {
    out.contradiction = true;
    return out;
  }
  for (;;) {
    std::optional<std::size_t> pick;
    std::size_t best_cost = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (!elim[k]) continue;
      std::size_t pos = 0, neg = 0;
      for (const auto& r : le) {
        if (r.a[k] > 0) ++pos;
        if (r.a[k] < 0) ++neg;
      }
      if (pos + neg == 0) continue;
      std::size_t cost = pos * neg;
      if (!pick || cost < best_cost) {
        pick = k;
        best_cost = cost;
      }
    }
    if (!pick) break;
    std::size_t k = *pick;
    Stage stage{k, {}};
    std::vector<Row> keep, pos, neg;
    for (auto& r : le) {
      if (r.a[k] > 0) pos.push_back(r);
      else if (r.a[k] < 0) neg.push_back(r);
      else keep.push_back(r);
    }
    for (const auto& p : pos) {
      for (const auto& q : neg) {
        Row c;
        c.a.resize(n);
        std::int64_t fp = -q.a[k], fq = p.a[k];
        for (std::size_t i = 0; i < n; ++i)
          c.a[i] = checked(static_cast<i128>(fp) * p.a[i] + static_cast<i128>(fq) * q.a[i]);
        c.b = checked(static_cast<i128>(fp) * p.b + static_cast<i128>(fq) * q.b);
        keep.push_back(std::move(c));
      }
    }
    stage.rows = pos;
    stage.rows.insert(stage.rows.end(), neg.begin(), neg.end());
    out.stages.push_back(std::move(stage));
    le = std::move(keep);
    if (!tidy(le)) {
      out.contradiction = true;
      return out;
    }
    if (le.size() > kRowLimit) throw Overflow{};
  }
  out.le = std::move(le);
  return out;
}

// Back-substitution with bounded backtracking over integer candidates.
class WitnessSearch {
 public:
  WitnessSearch(std::size_t n, const Elimination& e) : n_(n), e_(e), x_(n, 0) {}

  std::optional<std::vector<std::int64_t>> run() {
    if (!assign(e_.stages.size())) return std::nullopt;
    for (auto it = e_.subs.rbegin(); it != e_.subs.rend(); ++it) {
      const auto& r = it->row;
      i128 rest = 0;
      for (std::size_t i = 0; i < n_; ++i)
        if (i != it->var) rest += static_cast<i128>(r.a[i]) * x_[i];
      x_[it->var] = checked((r.b - rest) * r.a[it->var]);
    }
    return x_;
  }

 private:
  bool assign(std::size_t remaining) {
    if (remaining == 0) return true;
    if (++steps_ > 200000) return false;
    const auto& st = e_.stages[remaining - 1];
    std::optional<std::int64_t> lo, hi;
    for (const auto& r : st.rows) {
      i128 rest = 0;
      for (std::size_t i = 0; i < n_; ++i)
        if (i != st.var) rest += static_cast<i128>(r.a[i]) * x_[i];
      std::int64_t rhs = checked(r.b - rest);
      std::int64_t c = r.a[st.var];
      if (c > 0) {
        auto v = floor_div(rhs, c);
        hi = hi ? std::min(*hi, v) : v;
      } else {
        auto v = ceil_div(rhs, c);
        lo = lo ? std::max(*lo, v) : v;
      }
    }
    for (auto v : candidates(lo, hi)) {
      x_[st.var] = v;
      if (assign(remaining - 1)) return true;
    }
    x_[st.var] = 0;
    return false;
  }

  static std::vector<std::int64_t> candidates(std::optional<std::int64_t> lo,
                                              std::optional<std::int64_t> hi) {
    std::vector<std::int64_t> out;
    constexpr std::int64_t kSpan = 64;
    if (lo && hi) {
      if (*lo > *hi) return out;
      if (*hi - *lo <= 2 * kSpan) {
        for (auto v = *lo; v <= *hi; ++v) out.push_back(v);
      } else {
        for (auto v = *lo; v < *lo + kSpan; ++v) out.push_back(v);
        for (auto v = *hi - kSpan + 1; v <= *hi; ++v) out.push_back(v);
      }
    } else if (lo) {
      for (auto v = *lo; v < *lo + kSpan; ++v) out.push_back(v);
    } else if (hi) {
      for (auto v = *hi; v > *hi - kSpan; --v) out.push_back(v);
    } else {
      out.push_back(0);
      for (std::int64_t v = 1; v < kSpan / 2; ++v) {
        out.push_back(v);
        out.push_back(-v);
      }
    }
    return out;
  }

  std::size_t n_;
  const Elimination& e_;
  std::vector<std::int64_t> x_;
  std::size_t steps_ = 0;
};

struct IndexedLinear {
  std::vector<Var> vars;
  std::vector<Row> le;
  std::vector<Row> eq;
};

IndexedLinear index_linear(const Formula& f) {
  IndexedLinear out;
  std::map<Var, std::size_t> index;
  for (const auto& a : f.atoms()) {
    if (const auto* la = std::get_if<LinearAtom>(&a)) {
      for (const auto& [v, c] : la->terms) {
        if (!index.count(v)) {
          index.emplace(v, out.vars.size());
          out.vars.push_back(v);
        }
      }
    }
  }
  const std::size_t n = out.vars.size();
  for (const auto& a : f.atoms()) {
    const auto* la = std::get_if<LinearAtom>(&a);
    if (!la) continue;
    Row r;
    r.a.assign(n, 0);
    for (const auto& [v, c] : la->terms) r.a[index[v]] = c;
    r.b = la->bound;
    if (la->rel == Rel::Eq) {
      out.eq.push_back(std::move(r));
    } else {
      if (la->rel == Rel::Ge) {
        for (auto& c : r.a) c = -c;
        r.b = -r.b;
      }
      out.le.push_back(std::move(r));
    }
  }
  return out;
}

SatResult check_linear(const Formula& f) {
  auto sys = index_linear(f);
  if (sys.vars.empty() && sys.le.empty() && sys.eq.empty()) return SatResult::Sat;
  const std::size_t n = sys.vars.size();
  try {
    auto e = eliminate(n, sys.le, sys.eq, std::vector<bool>(n, true));
    if (e.contradiction) return SatResult::Unsat;
    auto witness = WitnessSearch(n, e).run();
    if (!witness) return SatResult::Unknown;
    // Verify against the original constraints.
    for (const auto& r : sys.le) {
      i128 s = 0;
      for (std::size_t i = 0; i < n; ++i) s += static_cast<i128>(r.a[i]) * (*witness)[i];
      if (s > r.b) return SatResult::Unknown;
    }
    for (const auto& r : sys.eq) {
      i128 s = 0;
      for (std::size_t i = 0; i < n; ++i) s += static_cast<i128>(r.a[i]) * (*witness)[i];
      if (s != r.b) return SatResult::Unknown;
    }
    return SatResult::Sat;
  } catch (const Overflow&) {
    return SatResult::Unknown;
  }
}

Formula row_formula(const std::vector<Var>& vars, const Row& r, Rel rel) {
  std::map<Var, std::int64_t> terms;
  for (std::size_t i = 0; i < vars.size(); ++i)
    if (r.a[i] != 0) terms[vars[i]] = r.a[i];
  bool is_false = false;
  auto atom = normalize(std::move(terms), rel, r.b, is_false);
  if (is_false) return Formula::bottom();
  if (!atom) return Formula::top();
  return Formula::of(*atom);
}

std::string render_expr(const std::vector<std::pair<Var, std::int64_t>>& terms,
                        std::int64_t constant, bool constant_always) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [v, c] : terms) {
    std::int64_t mag = c < 0 ? -c : c;
    if (first) {
      if (c < 0) os << "-";
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    if (mag != 1) os << mag << "*";
    os << to_string(v);
    first = false;
  }
  if (first) {
    os << constant;
  } else if (constant != 0 || constant_always) {
    os << (constant < 0 ? " - " : " + ") << (constant < 0 ? -constant : constant);
  }
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------

LinearExpr LinearExpr::variable(Var v, std::int64_t coeff) {
  LinearExpr e;
  e.terms[std::move(v)] = coeff;
  return e;
}

LinearExpr LinearExpr::number(std::int64_t k) {
  LinearExpr e;
  e.constant = k;
  return e;
}

LinearExpr& LinearExpr::operator+=(const LinearExpr& other) {
  for (const auto& [v, c] : other.terms) terms[v] += c;
  constant += other.constant;
  return *this;
}

LinearExpr& LinearExpr::operator-=(const LinearExpr& other) {
  for (const auto& [v, c] : other.terms) terms[v] -= c;
  constant -= other.constant;
  return *this;
}

LinearExpr LinearExpr::scaled(std::int64_t k) const {
  LinearExpr e;
  for (const auto& [v, c] : terms) e.terms[v] = c * k;
  e.constant = constant * k;
  return e;
}

Formula::Formula(std::vector<Atom> atoms) {
  // Linear atoms over identical terms collapse into one interval.
  struct Interval {
    std::optional<std::int64_t> lo, hi;
  };
  std::map<std::vector<std::pair<Var, std::int64_t>>, Interval> linear;
  std::vector<Atom> rest;
  for (auto& a : atoms) {
    if (auto* la = std::get_if<LinearAtom>(&a)) {
      auto& iv = linear[la->terms];
      if (la->rel != Rel::Ge) iv.hi = iv.hi ? std::min(*iv.hi, la->bound) : la->bound;
      if (la->rel != Rel::Le) iv.lo = iv.lo ? std::max(*iv.lo, la->bound) : la->bound;
    } else {
      rest.push_back(std::move(a));
    }
  }
  for (auto& [terms, iv] : linear) {
    if (iv.lo && iv.hi && *iv.lo > *iv.hi) {
      false_ = true;
      atoms_.clear();
      return;
    }
    if (iv.lo && iv.hi && *iv.lo == *iv.hi) {
      rest.push_back(LinearAtom{terms, Rel::Eq, *iv.lo});
      continue;
    }
    if (iv.lo) rest.push_back(LinearAtom{terms, Rel::Ge, *iv.lo});
    if (iv.hi) rest.push_back(LinearAtom{terms, Rel::Le, *iv.hi});
  }
  std::sort(rest.begin(), rest.end());
  rest.erase(std::unique(rest.begin(), rest.end()), rest.end());
  atoms_ = std::move(rest);
}

Formula Formula::bottom() {
  Formula f;
  f.false_ = true;
  return f;
}

Formula Formula::of(Atom atom) { return Formula(std::vector<Atom>{std::move(atom)}); }

bool Formula::contains(const Atom& atom) const {
  return std::binary_search(atoms_.begin(), atoms_.end(), atom);
}

Formula conj(const Formula& a, const Formula& b) {
  if (a.is_false() || b.is_false()) return Formula::bottom();
  std::vector<Atom> all = a.atoms();
  all.insert(all.end(), b.atoms().begin(), b.atoms().end());
  return Formula(std::move(all));
}

Formula conj(const Formula& a, const Atom& b) { return conj(a, Formula::of(b)); }

Formula compare(const LinearExpr& lhs, Cmp cmp, const LinearExpr& rhs) {
  LinearExpr d = lhs;
  d -= rhs;
  std::int64_t k = -d.constant;
  Rel rel = Rel::Le;
  switch (cmp) {
    case Cmp::Lt: rel = Rel::Le; k -= 1; break;
    case Cmp::Le: rel = Rel::Le; break;
    case Cmp::Eq: rel = Rel::Eq; break;
    case Cmp::Ge: rel = Rel::Ge; break;
    case Cmp::Gt: rel = Rel::Ge; k += 1; break;
    case Cmp::Ne: throw LogicError("disequality of integer terms is not conjunctive");
  }
  bool is_false = false;
  auto atom = normalize(d.terms, rel, k, is_false);
  if (is_false) return Formula::bottom();
  if (!atom) return Formula::top();
  return Formula::of(*atom);
}

Formula location_is(const std::string& var, const std::string& location,
                    bool primed, bool equal) {
  return Formula::of(LocationAtom{Var{var, primed}, equal, location});
}

Formula location_frame(const std::string& var) { return Formula::of(FrameAtom{var}); }

SatResult check_sat(const Formula& f, const Signature& sig) {
  if (f.is_false()) return SatResult::Unsat;
  for (const auto& [root, c] : location_classes(f))
    if (!class_consistent(c, sig)) return SatResult::Unsat;
  return check_linear(f);
}

bool is_satisfiable(const Formula& f, const Signature& sig) {
  return check_sat(f, sig) != SatResult::Unsat;
}

std::optional<Atom> negate(const Atom& atom) {
  if (const auto* la = std::get_if<LocationAtom>(&atom)) {
    auto n = *la;
    n.equal = !n.equal;
    return n;
  }
  if (const auto* li = std::get_if<LinearAtom>(&atom)) {
    if (li->rel == Rel::Eq) return std::nullopt;
    auto n = *li;
    if (li->rel == Rel::Le) {
      n.rel = Rel::Ge;
      n.bound = li->bound + 1;
    } else {
      n.rel = Rel::Le;
      n.bound = li->bound - 1;
    }
    return n;
  }
  return std::nullopt;
}

std::vector<Formula> negation_cases(const Atom& atom, const Signature& sig) {
  if (auto n = negate(atom)) return {Formula::of(*n)};
  if (const auto* li = std::get_if<LinearAtom>(&atom)) {
    auto lo = *li, hi = *li;
    lo.rel = Rel::Le;
    lo.bound = li->bound - 1;
    hi.rel = Rel::Ge;
    hi.bound = li->bound + 1;
    return {Formula::of(lo), Formula::of(hi)};
  }
  const auto& fa = std::get<FrameAtom>(atom);
  auto it = sig.locations.find(fa.var);
  if (it == sig.locations.end())
    throw LogicError("negating frame of " + fa.var + " needs its location domain");
  std::vector<Formula> out;
  for (const auto& l : it->second) {
    out.push_back(conj(location_is(fa.var, l, false, true),
                       location_is(fa.var, l, true, false)));
  }
  return out;
}

bool implies(const Formula& a, const Formula& b, const Signature& sig) {
  if (a.is_false()) return true;
  if (b.is_false()) return check_sat(a, sig) == SatResult::Unsat;
  for (const auto& atom : b.atoms()) {
    if (a.contains(atom)) continue;
    std::vector<Formula> cases;
    try {
      cases = negation_cases(atom, sig);
    } catch (const LogicError&) {
      return false;
    }
    for (const auto& c : cases)
      if (check_sat(conj(a, c), sig) != SatResult::Unsat) return false;
  }
  return true;
}

std::vector<Atom> unsat_core(const std::vector<Atom>& atoms, const Signature& sig) {
  std::vector<Atom> core = atoms;
  if (check_sat(Formula(core), sig) != SatResult::Unsat)
    throw LogicError("unsat_core: conjunction is satisfiable");
  for (std::size_t i = 0; i < core.size();) {
    std::vector<Atom> trial = core;
    trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(i));
    if (check_sat(Formula(trial), sig) == SatResult::Unsat) {
      core = std::move(trial);
    } else {
      ++i;
    }
  }
  return core;
}

std::set<Var> vocabulary(const Atom& a) {
  std::set<Var> out;
  if (const auto* la = std::get_if<LocationAtom>(&a)) {
    out.insert(la->var);
  } else if (const auto* fa = std::get_if<FrameAtom>(&a)) {
    out.insert(Var{fa->var, false});
    out.insert(Var{fa->var, true});
  } else {
    for (const auto& [v, c] : std::get<LinearAtom>(a).terms) out.insert(v);
  }
  return out;
}

std::set<Var> vocabulary(const Formula& f) {
  std::set<Var> out;
  for (const auto& a : f.atoms()) {
    auto v = vocabulary(a);
    out.insert(v.begin(), v.end());
  }
  return out;
}

bool is_interpolant(const Formula& a, const Formula& b, const Formula& itp,
                    const Signature& sig) {
  if (!implies(a, itp, sig)) return false;
  if (check_sat(conj(itp, b), sig) != SatResult::Unsat) return false;
  auto va = vocabulary(a), vb = vocabulary(b);
  for (const auto& v : vocabulary(itp))
    if (!va.count(v) || !vb.count(v)) return false;
  return true;
}

void set_interpolation_observer(InterpolationObserver observer) {
  g_observer = std::move(observer);
}

Formula interpolate(const Formula& a, const Formula& b, const Signature& sig) {
  if (check_sat(conj(a, b), sig) != SatResult::Unsat)
    throw LogicError("interpolate: a & b is not unsatisfiable");
  auto finish = [&](Formula itp) {
    assert(is_interpolant(a, b, itp, sig));
    if (g_observer) g_observer(a, b, itp);
    return itp;
  };
  if (check_sat(a, sig) == SatResult::Unsat) return finish(Formula::bottom());

  auto va = vocabulary(a), vb = vocabulary(b);
  auto shared = [&](const Var& v) { return va.count(v) && vb.count(v); };

  // Single negated atoms of b, location literals first.
  std::optional<Formula> linear_choice;
  for (const auto& atom : b.atoms()) {
    auto n = negate(atom);
    if (!n) continue;
    auto voc = vocabulary(*n);
    if (!std::all_of(voc.begin(), voc.end(), shared)) continue;
    Formula cand = Formula::of(*n);
    if (!implies(a, cand, sig)) continue;
    if (std::holds_alternative<LocationAtom>(*n)) return finish(cand);
    if (!linear_choice) linear_choice = cand;
  }
  if (linear_choice) return finish(*linear_choice);

  // Project the a-side of an unsat core onto the shared vocabulary.
  std::vector<Atom> all = a.atoms();
  all.insert(all.end(), b.atoms().begin(), b.atoms().end());
  auto core = unsat_core(all, sig);
  std::vector<Atom> a_part;
  for (const auto& atom : core)
    if (a.contains(atom) && !b.contains(atom)) a_part.push_back(atom);
  Formula cand = project(Formula(a_part), shared, sig);
  if (is_interpolant(a, b, cand, sig)) return finish(cand);
  cand = project(a, shared, sig);
  if (is_interpolant(a, b, cand, sig)) return finish(cand);
  throw LogicError("interpolate: no interpolant found for " + to_string(a) +
                   " ; " + to_string(b));
}

Formula project(const Formula& f, const std::function<bool(const Var&)>& keep,
                const Signature& sig) {
  if (f.is_false()) return f;
  std::vector<Atom> out;

  for (const auto& [root, c] : location_classes(f)) {
    if (!class_consistent(c, sig)) return Formula::bottom();
    std::vector<Var> kept;
    for (const auto& k : c.members) {
      Var v{base_name(k), k.back() == '\''};
      if (keep(v)) kept.push_back(v);
    }
    if (kept.empty()) continue;
    const auto* dom = domain_of(c, sig);
    std::optional<std::string> only;
    if (!c.eq.empty()) {
      only = *c.eq.begin();
    } else if (dom) {
      std::vector<std::string> allowed;
      for (const auto& l : *dom)
        if (!c.neq.count(l)) allowed.push_back(l);
      if (allowed.size() == 1) only = allowed.front();
    }
    for (const auto& v : kept) {
      if (only) {
        out.push_back(LocationAtom{v, true, *only});
      } else {
        for (const auto& l : c.neq) {
          if (dom && std::find(dom->begin(), dom->end(), l) == dom->end()) continue;
          out.push_back(LocationAtom{v, false, l});
        }
      }
    }
    if (!only && kept.size() == 2) out.push_back(FrameAtom{kept.front().name});
  }

  auto sys = index_linear(f);
  const std::size_t n = sys.vars.size();
  std::vector<bool> elim(n);
  for (std::size_t i = 0; i < n; ++i) elim[i] = !keep(sys.vars[i]);
  try {
    auto e = eliminate(n, sys.le, sys.eq, elim);
    if (e.contradiction) return Formula::bottom();
    Formula result(out);
    for (const auto& r : e.le) result = conj(result, row_formula(sys.vars, r, Rel::Le));
    for (const auto& r : e.eq) result = conj(result, row_formula(sys.vars, r, Rel::Eq));
    return result;
  } catch (const Overflow&) {
    // Dropping constraints over-approximates the projection.
    Formula result(out);
    for (const auto& atom : f.atoms()) {
      if (!std::holds_alternative<LinearAtom>(atom)) continue;
      auto voc = vocabulary(atom);
      if (std::all_of(voc.begin(), voc.end(), keep)) result = conj(result, atom);
    }
    return result;
  }
}

Formula pre_state(const Formula& f, const Signature& sig) {
  return project(f, [](const Var& v) { return !v.primed; }, sig);
}

Formula post_state(const Formula& f, const Signature& sig) {
  return unprime(project(f, [](const Var& v) { return v.primed; }, sig));
}

Formula prime(const Formula& f) {
  if (f.is_false()) return f;
  std::vector<Atom> out;
  for (const auto& a : f.atoms()) {
    if (auto la = std::get_if<LocationAtom>(&a)) {
      if (la->var.primed) throw LogicError("prime: formula already mentions primed variables");
      auto c = *la;
      c.var.primed = true;
      out.push_back(c);
    } else if (auto li = std::get_if<LinearAtom>(&a)) {
      std::map<Var, std::int64_t> terms;
      for (const auto& [v, c] : li->terms) {
        if (v.primed) throw LogicError("prime: formula already mentions primed variables");
        terms[Var{v.name, true}] = c;
      }
      bool is_false = false;
      auto n = normalize(terms, li->rel, li->bound, is_false);
      out.push_back(*n);
    } else {
      throw LogicError("prime: frame atoms are transition predicates");
    }
  }
  return Formula(out);
}

Formula unprime(const Formula& f) {
  if (f.is_false()) return f;
  std::vector<Atom> out;
  for (const auto& a : f.atoms()) {
    if (auto la = std::get_if<LocationAtom>(&a)) {
      if (!la->var.primed) throw LogicError("unprime: formula mentions current variables");
      auto c = *la;
      c.var.primed = false;
      out.push_back(c);
    } else if (auto li = std::get_if<LinearAtom>(&a)) {
      std::map<Var, std::int64_t> terms;
      for (const auto& [v, c] : li->terms) {
        if (!v.primed) throw LogicError("unprime: formula mentions current variables");
        terms[Var{v.name, false}] = c;
      }
      bool is_false = false;
      auto n = normalize(terms, li->rel, li->bound, is_false);
      out.push_back(*n);
    } else {
      throw LogicError("unprime: frame atoms are transition predicates");
    }
  }
  return Formula(out);
}

bool eval(const Atom& a, const Valuation& pre, const Valuation& post) {
  auto lookup = [&](const Var& v) -> const Value& {
    const auto& val = v.primed ? post : pre;
    auto it = val.find(v.name);
    if (it == val.end()) throw LogicError("eval: no value for " + to_string(v));
    return it->second;
  };
  if (const auto* la = std::get_if<LocationAtom>(&a)) {
    const auto* s = std::get_if<std::string>(&lookup(la->var));
    if (!s) throw LogicError("eval: " + la->var.name + " is not a location variable");
    return (*s == la->location) == la->equal;
  }
  if (const auto* fa = std::get_if<FrameAtom>(&a)) {
    return lookup(Var{fa->var, false}) == lookup(Var{fa->var, true});
  }
  const auto& li = std::get<LinearAtom>(a);
  i128 sum = 0;
  for (const auto& [v, c] : li.terms) {
    const auto* x = std::get_if<std::int64_t>(&lookup(v));
    if (!x) throw LogicError("eval: " + v.name + " is not an integer variable");
    sum += static_cast<i128>(c) * *x;
  }
  switch (li.rel) {
    case Rel::Le: return sum <= li.bound;
    case Rel::Ge: return sum >= li.bound;
    case Rel::Eq: return sum == li.bound;
  }
  return false;
}

bool eval(const Formula& f, const Valuation& pre, const Valuation& post) {
  if (f.is_false()) return false;
  for (const auto& a : f.atoms())
    if (!eval(a, pre, post)) return false;
  return true;
}

std::string to_string(const Var& v) { return v.primed ? v.name + "'" : v.name; }

std::string to_string(const Atom& a) {
  if (const auto* la = std::get_if<LocationAtom>(&a))
    return to_string(la->var) + (la->equal ? " = " : " != ") + la->location;
  if (const auto* fa = std::get_if<FrameAtom>(&a)) return fa->var + "' = " + fa->var;
  const auto& li = std::get<LinearAtom>(a);
  std::vector<std::pair<Var, std::int64_t>> lhs, rhs;
  for (const auto& t : li.terms) {
    if (t.second > 0) lhs.push_back(t);
    else rhs.emplace_back(t.first, -t.second);
  }
  auto primed_first = [](const auto& x, const auto& y) {
    if (x.first.primed != y.first.primed) return x.first.primed;
    return x.first.name < y.first.name;
  };
  std::stable_sort(lhs.begin(), lhs.end(), primed_first);
  std::stable_sort(rhs.begin(), rhs.end(), primed_first);
  const char* op = li.rel == Rel::Le ? " <= " : li.rel == Rel::Ge ? " >= " : " = ";
  return render_expr(lhs, 0, false) + op + render_expr(rhs, li.bound, false);
}

std::string to_string(const Formula& f) {
  if (f.is_false()) return "false";
  if (f.atoms().empty()) return "true";
  std::string out;
  for (const auto& a : f.atoms()) {
    if (!out.empty()) out += " & ";
    out += to_string(a);
  }
  return out;
}

}  // namespace causal
