#include "causal/trace.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <queue>
#include <set>

namespace causal {

void ConcurrentTrace::add_event(Event e) {
  auto it = std::lower_bound(events_.begin(), events_.end(), e.id,
                             [](const Event& x, const std::string& id) { return x.id < id; });
  if (it != events_.end() && it->id == e.id) {
    *it = std::move(e);
  } else {
    events_.insert(it, std::move(e));
  }
}

const Event* ConcurrentTrace::find_event(const std::string& id) const {
  auto it = std::lower_bound(events_.begin(), events_.end(), id,
                             [](const Event& x, const std::string& k) { return x.id < k; });
  return it != events_.end() && it->id == id ? &*it : nullptr;
}

const Event& ConcurrentTrace::event(const std::string& id) const {
  const auto* e = find_event(id);
  if (!e) throw TraceError("no event '" + id + "'");
  return *e;
}

Event& ConcurrentTrace::event(const std::string& id) {
  return const_cast<Event&>(std::as_const(*this).event(id));
}

void ConcurrentTrace::add_link(const std::string& src, const std::string& tgt, Formula label) {
  if (!has_event(src) || !has_event(tgt)) throw TraceError("link " + src + " -> " + tgt + ": unknown event");
  auto key = std::make_pair(src, tgt);
  auto it = std::lower_bound(links_.begin(), links_.end(), key,
                             [](const CausalLink& l, const auto& k) {
                               return std::tie(l.src, l.tgt) < std::tie(k.first, k.second);
                             });
  if (it != links_.end() && it->src == src && it->tgt == tgt) {
    it->label = conj(it->label, label);
  } else {
    links_.insert(it, CausalLink{src, tgt, std::move(label)});
  }
}

const CausalLink* ConcurrentTrace::find_link(const std::string& src, const std::string& tgt) const {
  for (const auto& l : links_)
    if (l.src == src && l.tgt == tgt) return &l;
  return nullptr;
}

void ConcurrentTrace::add_conflict(const std::string& a, const std::string& b) {
  if (!has_event(a) || !has_event(b)) throw TraceError("conflict " + a + " # " + b + ": unknown event");
  Conflict c = a < b ? Conflict{a, b} : Conflict{b, a};
  auto it = std::lower_bound(conflicts_.begin(), conflicts_.end(), c,
                             [](const Conflict& x, const Conflict& y) {
                               return std::tie(x.a, x.b) < std::tie(y.a, y.b);
                             });
  if (it == conflicts_.end() || !(*it == c)) conflicts_.insert(it, std::move(c));
}

bool ConcurrentTrace::in_conflict(const std::string& a, const std::string& b) const {
  Conflict c = a < b ? Conflict{a, b} : Conflict{b, a};
  return std::find(conflicts_.begin(), conflicts_.end(), c) != conflicts_.end();
}

bool ConcurrentTrace::has_path(const std::string& from, const std::string& to) const {
  std::set<std::string> seen;
  std::vector<std::string> stack{from};
  while (!stack.empty()) {
    auto cur = stack.back();
    stack.pop_back();
    for (const auto& l : links_) {
      if (l.src != cur) continue;
      if (l.tgt == to) return true;
      if (seen.insert(l.tgt).second) stack.push_back(l.tgt);
    }
  }
  return false;
}

std::vector<const CausalLink*> ConcurrentTrace::incoming(const std::string& id) const {
  std::vector<const CausalLink*> out;
  for (const auto& l : links_)
    if (l.tgt == id) out.push_back(&l);
  return out;
}

namespace {

bool natural_less(const std::string& a, const std::string& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (std::isdigit(static_cast<unsigned char>(a[i])) && std::isdigit(static_cast<unsigned char>(b[j]))) {
      std::size_t ie = i, je = j;
      while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
      while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
      auto da = a.substr(i, ie - i), db = b.substr(j, je - j);
      da.erase(0, std::min(da.find_first_not_of('0'), da.size()));
      db.erase(0, std::min(db.find_first_not_of('0'), db.size()));
      if (da.size() != db.size()) return da.size() < db.size();
      if (da != db) return da < db;
      i = ie;
      j = je;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  if ((a.size() - i) != (b.size() - j)) return a.size() - i < b.size() - j;
  return a < b;
}

// Digit runs compare by value, so n2_e1 comes before n10_e1.
struct NaturalGreater {
  bool operator()(const std::string& a, const std::string& b) const { return natural_less(b, a); }
};

std::optional<std::vector<std::string>> try_topological(const ConcurrentTrace& t) {
  std::map<std::string, int> indegree;
  for (const auto& e : t.events()) indegree[e.id] = 0;
  for (const auto& l : t.links()) {
    if (!indegree.count(l.src) || !indegree.count(l.tgt)) return std::nullopt;
    ++indegree[l.tgt];
  }
  std::priority_queue<std::string, std::vector<std::string>, NaturalGreater> ready;
  for (const auto& [id, d] : indegree)
    if (d == 0) ready.push(id);
  std::vector<std::string> out;
  while (!ready.empty()) {
    auto id = ready.top();
    ready.pop();
    out.push_back(id);
    for (const auto& l : t.links())
      if (l.src == id && --indegree[l.tgt] == 0) ready.push(l.tgt);
  }
  if (out.size() != t.events().size()) return std::nullopt;
  return out;
}

}  // namespace

bool well_formed(const ConcurrentTrace& t, std::vector<std::string>* diagnostics) {
  std::vector<std::string> problems;
  for (const auto& l : t.links()) {
    if (!t.has_event(l.src)) problems.push_back("link source '" + l.src + "' does not exist");
    if (!t.has_event(l.tgt)) problems.push_back("link target '" + l.tgt + "' does not exist");
    if (l.src == l.tgt) problems.push_back("self link on '" + l.src + "'");
  }
  for (const auto& c : t.conflicts()) {
    if (c.a == c.b) problems.push_back("self conflict on '" + c.a + "'");
    if (!t.has_event(c.a) || !t.has_event(c.b))
      problems.push_back("conflict " + c.a + " # " + c.b + " references a missing event");
  }
  if (problems.empty() && !try_topological(t)) problems.push_back("causal links form a cycle");
  if (diagnostics) *diagnostics = problems;
  return problems.empty();
}

std::vector<std::string> topological_events(const ConcurrentTrace& t) {
  auto order = try_topological(t);
  if (!order) throw TraceError("causal links form a cycle or reference missing events");
  return *order;
}

bool is_member(const Computation& c, const ConcurrentTrace& t) {
  if (t.events().empty()) return true;
  const std::size_t n = c.steps();
  if (n == 0) return false;
  const auto order = topological_events(t);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < order.size(); ++i) index[order[i]] = i;

  std::vector<std::vector<char>> holds(order.size(), std::vector<char>(n));
  for (std::size_t e = 0; e < order.size(); ++e) {
    const auto& label = t.event(order[e]).label;
    for (std::size_t j = 0; j < n; ++j) holds[e][j] = eval(label, c.states[j], c.states[j + 1]);
  }
  struct LinkInfo {
    std::size_t src;
    std::vector<std::size_t> bad;  // prefix counts of violating steps
    bool trivial;
  };
  std::vector<std::vector<LinkInfo>> in(order.size());
  for (const auto& l : t.links()) {
    LinkInfo info{index.at(l.src), {}, l.label.is_true()};
    if (!info.trivial) {
      info.bad.assign(n + 1, 0);
      for (std::size_t j = 0; j < n; ++j)
        info.bad[j + 1] = info.bad[j] + (eval(l.label, c.states[j], c.states[j + 1]) ? 0 : 1);
    }
    in[index.at(l.tgt)].push_back(std::move(info));
  }
  std::vector<std::vector<std::size_t>> conflicts(order.size());
  for (const auto& cf : t.conflicts()) {
    auto a = index.at(cf.a), b = index.at(cf.b);
    conflicts[std::max(a, b)].push_back(std::min(a, b));
  }

  std::vector<std::size_t> pos(order.size());
  std::function<bool(std::size_t)> place = [&](std::size_t e) -> bool {
    if (e == order.size()) return true;
    for (std::size_t j = 0; j < n; ++j) {
      if (!holds[e][j]) continue;
      bool ok = true;
      for (const auto& l : in[e]) {
        auto i = pos[l.src];
        if (i > j) { ok = false; break; }
        if (!l.trivial && j > i + 1 && l.bad[j] - l.bad[i + 1] != 0) { ok = false; break; }
      }
      if (!ok) continue;
      for (auto o : conflicts[e])
        if (pos[o] == j) { ok = false; break; }
      if (!ok) continue;
      pos[e] = j;
      if (place(e + 1)) return true;
    }
    return false;
  };
  return place(0);
}

namespace {

Computation unroll(const Computation& c, std::size_t prefix_len, std::size_t copies) {
  Computation out;
  const std::size_t ls = *c.loop_start;
  for (std::size_t i = 0; i < prefix_len; ++i) out.states.push_back(c.states[i]);
  for (std::size_t k = 0; k < copies; ++k)
    for (std::size_t i = ls; i < c.states.size(); ++i) out.states.push_back(c.states[i]);
  out.states.push_back(c.states[ls]);
  return out;
}

}  // namespace

bool is_member_lasso(const Computation& c, const InfiniteTrace& t) {
  if (!c.loop_start || *c.loop_start >= c.states.size())
    throw TraceError("lasso computation needs a loop start inside the state sequence");
  const std::size_t ls = *c.loop_start;
  const std::size_t m = c.states.size();
  if (!t.invariant.is_true()) {
    for (std::size_t i = ls; i < m; ++i) {
      const auto& next = i + 1 < m ? c.states[i + 1] : c.states[ls];
      if (!eval(t.invariant, c.states[i], next)) return false;
    }
  }
  if (!t.cycle.empty()) {
    Computation loop{{c.states.begin() + static_cast<std::ptrdiff_t>(ls), c.states.end()}, 0};
    if (!is_member(unroll(loop, 0, t.cycle.events().size() + 1), t.cycle)) return false;
  }
  if (!t.stem.empty()) {
    auto prefix = unroll(c, ls, t.stem.events().size() + 1);
    if (!is_member(prefix, t.stem)) return false;
  }
  return true;
}

namespace {

class Embedder {
 public:
  Embedder(const ConcurrentTrace& small, const ConcurrentTrace& big, const Signature& sig)
      : small_(small), big_(big), sig_(sig) {}

  std::optional<EventMap> run() {
    order_ = topological_events(small_);
    for (const auto& id : order_) {
      std::vector<std::string> cands;
      const auto& label = small_.event(id).label;
      for (const auto& be : big_.events())
        if (implies(be.label, label, sig_)) cands.push_back(be.id);
      if (cands.empty()) return std::nullopt;
      candidates_.push_back(std::move(cands));
    }
    if (!search(0)) return std::nullopt;
    return map_;
  }

 private:
  bool search(std::size_t k) {
    if (k == order_.size()) return true;
    const auto& id = order_[k];
    for (const auto& cand : candidates_[k]) {
      if (used_.count(cand)) continue;
      map_[id] = cand;
      if (consistent(id)) {
        used_.insert(cand);
        if (search(k + 1)) return true;
        used_.erase(cand);
      }
      map_.erase(id);
    }
    return false;
  }

  bool consistent(const std::string& id) {
    for (const auto& l : small_.links()) {
      if (l.tgt != id && l.src != id) continue;
      auto s = map_.find(l.src), t = map_.find(l.tgt);
      if (s == map_.end() || t == map_.end()) continue;
      if (!path_ok(s->second, t->second, l.label)) return false;
    }
    for (const auto& c : small_.conflicts()) {
      if (c.a != id && c.b != id) continue;
      auto a = map_.find(c.a), b = map_.find(c.b);
      if (a == map_.end() || b == map_.end()) continue;
      if (big_.in_conflict(a->second, b->second)) continue;
      if (is_satisfiable(conj(big_.event(a->second).label, big_.event(b->second).label), sig_))
        return false;
    }
    return true;
  }

  bool implied(const Formula& f, const Formula& g) {
    if (g.is_true()) return true;
    auto key = std::make_pair(to_string(f), to_string(g));
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    return cache_[key] = implies(f, g, sig_);
  }

  // A chain of big links from `from` to `to`; every link label and every
  // intermediate event label implies `label`.
  bool path_ok(const std::string& from, const std::string& to, const Formula& label) {
    std::set<std::string> seen{from};
    std::vector<std::string> stack{from};
    while (!stack.empty()) {
      auto cur = stack.back();
      stack.pop_back();
      for (const auto& l : big_.links()) {
        if (l.src != cur || !implied(l.label, label)) continue;
        if (l.tgt == to) return true;
        if (seen.count(l.tgt)) continue;
        if (!implied(big_.event(l.tgt).label, label)) continue;
        seen.insert(l.tgt);
        stack.push_back(l.tgt);
      }
    }
    return false;
  }

  const ConcurrentTrace& small_;
  const ConcurrentTrace& big_;
  const Signature& sig_;
  std::vector<std::string> order_;
  std::vector<std::vector<std::string>> candidates_;
  EventMap map_;
  std::set<std::string> used_;
  std::map<std::pair<std::string, std::string>, bool> cache_;
};

}  // namespace

std::optional<EventMap> embed(const ConcurrentTrace& small, const ConcurrentTrace& big,
                              const Signature& sig) {
  return Embedder(small, big, sig).run();
}

std::optional<EventMap> embed(const InfiniteTrace& small, const InfiniteTrace& big,
                              const Signature& sig) {
  if (!implies(big.invariant, small.invariant, sig)) return std::nullopt;
  auto stem = embed(small.stem, big.stem, sig);
  if (!stem) return std::nullopt;
  auto cycle = embed(small.cycle, big.cycle, sig);
  if (!cycle) return std::nullopt;
  stem->insert(cycle->begin(), cycle->end());
  return stem;
}

std::string to_string(const ConcurrentTrace& t) {
  if (t.events().empty()) return "empty";
  std::vector<std::string> order;
  try {
    order = topological_events(t);
  } catch (const TraceError&) {
    for (const auto& e : t.events()) order.push_back(e.id);
  }
  std::string out;
  auto add = [&](const std::string& item) {
    if (!out.empty()) out += "; ";
    out += item;
  };
  for (const auto& id : order) add(id + "[" + to_string(t.event(id).label) + "]");
  for (const auto& l : t.links()) add(l.src + " ->[" + to_string(l.label) + "] " + l.tgt);
  for (const auto& c : t.conflicts()) add(c.a + " # " + c.b);
  return out;
}

std::string to_string(const InfiniteTrace& t) {
  std::string out = to_string(t.stem) + " ( " + to_string(t.cycle);
  if (!t.invariant.is_true()) out += " | always[" + to_string(t.invariant) + "]";
  return out + " )^w";
}

}  // namespace causal
