#include "causal/dsl.hpp"

#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace causal {

ParseError::ParseError(int line, int column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + message),
      line_(line),
      column_(column) {}

namespace {

struct Token {
  enum Kind { Ident, Number, Symbol, End } kind = End;
  std::string text;
  int line = 1;
  int column = 1;
};

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  static const std::vector<std::string> two = {"->", "..", "!=", "<=", ">=", ":="};
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.kind = Token::Ident;
      t.text = src.substr(i, j - i);
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.kind = Token::Number;
      t.text = src.substr(i, j - i);
      advance(j - i);
    } else {
      t.kind = Token::Symbol;
      std::string pair = src.substr(i, 2);
      bool matched = false;
      for (const auto& s : two) {
        if (pair == s) {
          t.text = s;
          advance(2);
          matched = true;
          break;
        }
      }
      if (!matched) {
        if (std::string("{};:,=<>+-*&()#'[]!").find(c) == std::string::npos)
          throw ParseError(line, col, std::string("unexpected character '") + c + "'");
        t.text = std::string(1, c);
        advance(1);
      }
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

/// Linear expression over names not yet resolved to variables.
struct RawExpr {
  std::vector<std::tuple<std::int64_t, std::string, bool>> terms;  // coeff, name, primed
  std::int64_t constant = 0;
};

struct RawAtom {
  RawExpr lhs;
  std::string op;
  RawExpr rhs;
  int line = 0;
  int column = 0;
};

struct RawFormula {
  bool is_false = false;
  std::vector<RawAtom> atoms;
  int line = 0;
  int column = 0;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(lex(text)) {}

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at(const std::string& s) const {
    return peek().kind != Token::End && peek().kind != Token::Number && peek().text == s;
  }
  bool at_end() const { return peek().kind == Token::End; }
  Token take() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw ParseError(t.line, t.column, msg);
  }
  [[noreturn]] void fail(const std::string& msg) const { fail(peek(), msg); }

  std::string describe(const Token& t) const {
    return t.kind == Token::End ? "end of input" : "'" + t.text + "'";
  }

  Token expect(const std::string& s) {
    if (!at(s)) fail("expected '" + s + "' but found " + describe(peek()));
    return take();
  }
  bool accept(const std::string& s) {
    if (!at(s)) return false;
    take();
    return true;
  }
  Token ident(const char* what) {
    if (peek().kind != Token::Ident) fail(std::string("expected ") + what + " but found " + describe(peek()));
    return take();
  }
  std::int64_t integer() {
    bool neg = accept("-");
    if (peek().kind != Token::Number) fail("expected a number but found " + describe(peek()));
    auto t = take();
    std::int64_t v = 0;
    try {
      v = std::stoll(t.text);
    } catch (const std::exception&) {
      fail(t, "number out of range");
    }
    return neg ? -v : v;
  }

  RawExpr expr() {
    RawExpr e;
    std::int64_t sign = accept("-") ? -1 : 1;
    for (;;) {
      if (peek().kind == Token::Number) {
        std::int64_t k = integer();
        if (accept("*")) {
          auto [name, primed] = var();
          e.terms.emplace_back(sign * k, name, primed);
        } else {
          e.constant += sign * k;
        }
      } else if (peek().kind == Token::Ident) {
        auto [name, primed] = var();
        e.terms.emplace_back(sign, name, primed);
      } else {
        fail("expected a term but found " + describe(peek()));
      }
      if (accept("+")) sign = 1;
      else if (accept("-")) sign = -1;
      else break;
    }
    return e;
  }

  std::pair<std::string, bool> var() {
    auto t = ident("a variable");
    return {t.text, accept("'")};
  }

  RawFormula formula() {
    RawFormula f;
    f.line = peek().line;
    f.column = peek().column;
    if (accept("true")) return f;
    if (accept("false")) {
      f.is_false = true;
      return f;
    }
    do {
      RawAtom a;
      a.line = peek().line;
      a.column = peek().column;
      a.lhs = expr();
      static const std::set<std::string> ops = {"=", "!=", "<", "<=", ">", ">="};
      if (!ops.count(peek().text) || peek().kind != Token::Symbol)
        fail("expected a comparison but found " + describe(peek()));
      a.op = take().text;
      a.rhs = expr();
      f.atoms.push_back(std::move(a));
    } while (accept("&"));
    return f;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

LinearExpr to_linear(const RawExpr& e, const Signature& sig, const RawAtom& at) {
  LinearExpr out = LinearExpr::number(e.constant);
  for (const auto& [k, name, primed] : e.terms) {
    if (!sig.integers.count(name)) {
      if (sig.is_location(name))
        throw ParseError(at.line, at.column, "location variable '" + name + "' in arithmetic");
      throw ParseError(at.line, at.column, "unknown variable '" + name + "'");
    }
    out += LinearExpr::variable(Var{name, primed}, k);
  }
  return out;
}

bool single(const RawExpr& e) {
  return e.constant == 0 && e.terms.size() == 1 && std::get<0>(e.terms[0]) == 1;
}

Formula resolve(const RawFormula& f, const Signature& sig) {
  if (f.is_false) return Formula::bottom();
  Formula out;
  for (const auto& a : f.atoms) {
    auto loc_side = [&](const RawExpr& e) { return single(e) && sig.is_location(std::get<1>(e.terms[0])); };
    if (loc_side(a.lhs) || loc_side(a.rhs)) {
      const RawExpr& v = loc_side(a.lhs) ? a.lhs : a.rhs;
      const RawExpr& other = loc_side(a.lhs) ? a.rhs : a.lhs;
      const auto& [k, name, primed] = v.terms[0];
      if (a.op != "=" && a.op != "!=")
        throw ParseError(a.line, a.column, "locations only compare with '=' or '!='");
      if (!single(other))
        throw ParseError(a.line, a.column, "'" + name + "' must be compared with a location");
      const auto& [k2, name2, primed2] = other.terms[0];
      if (name2 == name) {
        if (primed == primed2 || a.op != "=")
          throw ParseError(a.line, a.column, "malformed frame condition on '" + name + "'");
        out = conj(out, location_frame(name));
        continue;
      }
      if (primed2 || sig.is_location(name2) || sig.integers.count(name2))
        throw ParseError(a.line, a.column, "'" + name + "' must be compared with a location");
      const auto& dom = sig.locations.at(name);
      if (std::find(dom.begin(), dom.end(), name2) == dom.end())
        throw ParseError(a.line, a.column, "'" + name2 + "' is not a location of '" + name + "'");
      out = conj(out, location_is(name, name2, primed, a.op == "="));
      continue;
    }
    static const std::map<std::string, Cmp> cmps = {{"=", Cmp::Eq}, {"<", Cmp::Lt}, {"<=", Cmp::Le},
                                                    {">", Cmp::Gt}, {">=", Cmp::Ge}};
    if (a.op == "!=")
      throw ParseError(a.line, a.column, "'!=' on integers is not conjunctive");
    out = conj(out, compare(to_linear(a.lhs, sig, a), cmps.at(a.op), to_linear(a.rhs, sig, a)));
  }
  return out;
}

struct PendingGuard {
  std::size_t local;
  RawFormula guard;
  std::vector<std::pair<Token, RawExpr>> updates;
};

}  // namespace

Formula parse_formula(const std::string& text, const Signature& sig) {
  Parser p(text);
  auto f = p.formula();
  if (!p.at_end()) p.fail("unexpected " + p.describe(p.peek()) + " after formula");
  return resolve(f, sig);
}

TransitionSystem parse_model(const std::string& text) {
  Parser p(text);
  TransitionSystem s;
  auto head = p.expect("system");
  s.name = p.ident("a system name").text;
  p.expect("{");
  std::vector<PendingGuard> pending;
  std::map<std::string, Token> where;
  while (!p.accept("}")) {
    if (p.at_end()) p.fail("unterminated system body");
    if (p.accept("var")) {
      IntegerVariable v;
      auto name = p.ident("a variable name");
      v.name = name.text;
      where.emplace(v.name, name);
      p.expect(":");
      p.expect("int");
      if (p.accept("in")) {
        v.lower = p.integer();
        p.expect("..");
        v.upper = p.integer();
      }
      p.expect("init");
      v.initial = p.integer();
      p.expect(";");
      s.integers.push_back(v);
    } else if (p.accept("process")) {
      Process proc;
      auto name = p.ident("a process name");
      proc.name = name.text;
      where.emplace(location_variable(proc.name), name);
      p.expect("{");
      p.expect("locations");
      do {
        proc.locations.push_back(p.ident("a location").text);
      } while (p.accept(","));
      p.expect("init");
      proc.initial = p.ident("a location").text;
      p.expect(";");
      while (!p.accept("}")) {
        p.expect("trans");
        LocalTransition t;
        auto tn = p.ident("a transition name");
        t.name = tn.text;
        where.emplace("trans:" + t.name, tn);
        t.process = proc.name;
        p.expect(":");
        t.source = p.ident("a location").text;
        p.expect("->");
        t.target = p.ident("a location").text;
        PendingGuard g{s.locals.size(), {}, {}};
        if (p.accept("when")) g.guard = p.formula();
        if (p.accept("update")) {
          do {
            auto var = p.ident("a variable");
            p.expect(":=");
            g.updates.emplace_back(var, p.expr());
          } while (p.accept(","));
        }
        p.expect(";");
        s.locals.push_back(t);
        pending.push_back(std::move(g));
      }
      s.processes.push_back(proc);
    } else if (p.accept("sync")) {
      p.expect("{");
      while (!p.accept("}")) {
        SyncVector g;
        auto gn = p.ident("a sync vector name");
        g.name = gn.text;
        where.emplace("sync:" + g.name, gn);
        p.expect("=");
        p.expect("{");
        if (!p.at("}")) {
          do {
            auto m = p.ident("a transition name");
            bool known = false;
            for (const auto& t : s.locals) known = known || t.name == m.text;
            if (!known) p.fail(m, "unknown transition '" + m.text + "'");
            g.members.push_back(m.text);
          } while (p.accept(","));
        }
        p.expect("}");
        p.expect(";");
        s.syncs.push_back(g);
      }
    } else {
      p.fail("expected 'var', 'process' or 'sync' but found " + p.describe(p.peek()));
    }
  }
  if (!p.at_end()) p.fail("unexpected " + p.describe(p.peek()) + " after system");

  const auto sig = signature_of(s);
  for (auto& g : pending) {
    auto& t = s.locals[g.local];
    try {
      t.guard = resolve(g.guard, sig);
    } catch (const ModelError& e) {
      throw ParseError(g.guard.line, g.guard.column, e.what());
    }
    for (const auto& [var, e] : g.updates) {
      RawAtom at;
      at.line = var.line;
      at.column = var.column;
      t.updates.push_back({var.text, to_linear(e, sig, at)});
    }
  }
  try {
    validate(s);
  } catch (const ModelError& e) {
    // Point at the offending declaration when the message names one.
    std::string msg = e.what();
    Token at = head;
    for (const auto& [key, tok] : where) {
      auto bare = key.substr(key.find(':') == std::string::npos ? 0 : key.find(':') + 1);
      if (msg.find("'" + bare + "'") != std::string::npos) {
        at = tok;
        break;
      }
    }
    throw ParseError(at.line, at.column, msg);
  }
  return s;
}

std::string render_expr(const LinearExpr& e) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [v, c] : e.terms) {
    if (c == 0) continue;
    auto mag = c < 0 ? -c : c;
    os << (first ? (c < 0 ? "-" : "") : (c < 0 ? " - " : " + "));
    if (mag != 1) os << mag << "*";
    os << to_string(v);
    first = false;
  }
  if (first) {
    os << e.constant;
  } else if (e.constant != 0) {
    os << (e.constant < 0 ? " - " : " + ") << (e.constant < 0 ? -e.constant : e.constant);
  }
  return os.str();
}

std::string render_model(const TransitionSystem& s) {
  std::ostringstream os;
  os << "system " << s.name << " {\n";
  for (const auto& v : s.integers) {
    os << "  var " << v.name << ": int";
    if (v.lower && v.upper) os << " in " << *v.lower << ".." << *v.upper;
    os << " init " << v.initial << ";\n";
  }
  for (const auto& p : s.processes) {
    os << "  process " << p.name << " {\n    locations ";
    for (std::size_t i = 0; i < p.locations.size(); ++i) os << (i ? ", " : "") << p.locations[i];
    os << " init " << p.initial << ";\n";
    for (const auto& t : s.locals) {
      if (t.process != p.name) continue;
      os << "    trans " << t.name << ": " << t.source << " -> " << t.target;
      if (!t.guard.is_true()) os << " when " << to_string(t.guard);
      for (std::size_t i = 0; i < t.updates.size(); ++i)
        os << (i ? ", " : " update ") << t.updates[i].var << " := " << render_expr(t.updates[i].expr);
      os << ";\n";
    }
    os << "  }\n";
  }
  if (!s.syncs.empty()) {
    os << "  sync {\n";
    for (const auto& g : s.syncs) {
      os << "    " << g.name << " = {";
      for (std::size_t i = 0; i < g.members.size(); ++i) os << (i ? ", " : "") << g.members[i];
      os << "};\n";
    }
    os << "  }\n";
  }
  os << "}\n";
  return os.str();
}

namespace {

void parse_trace_items(Parser& p, ConcurrentTrace& t, const ComposedSystem& sys,
                       std::vector<std::pair<Token, std::string>>& link_ends) {
  const auto& sig = sys.signature();
  if (p.accept("event")) {
    auto id = p.ident("an event name");
    if (t.has_event(id.text)) p.fail(id, "duplicate event '" + id.text + "'");
    p.expect(":");
    Formula label = p.accept("init") ? prime(sys.init()) : resolve(p.formula(), sig);
    t.add_event({id.text, label, ""});
  } else if (p.accept("link")) {
    auto a = p.ident("an event name");
    p.expect("->");
    auto b = p.ident("an event name");
    Formula label;
    if (p.accept("label")) label = resolve(p.formula(), sig);
    t.add_link(a.text, b.text, label);
    link_ends.emplace_back(a, a.text);
    link_ends.emplace_back(b, b.text);
  } else if (p.accept("conflict")) {
    auto a = p.ident("an event name");
    p.expect("#");
    auto b = p.ident("an event name");
    if (a.text == b.text) p.fail(b, "an event cannot conflict with itself");
    t.add_conflict(a.text, b.text);
    link_ends.emplace_back(a, a.text);
    link_ends.emplace_back(b, b.text);
  } else {
    p.fail("expected 'event', 'link', 'conflict' or 'cycle' but found " + p.describe(p.peek()));
  }
  p.expect(";");
}

void check_trace(Parser& p, const Token& at, const ConcurrentTrace& t,
                 const std::vector<std::pair<Token, std::string>>& ends) {
  for (const auto& [tok, id] : ends)
    if (!t.has_event(id)) p.fail(tok, "unknown event '" + id + "'");
  std::vector<std::string> problems;
  if (!well_formed(t, &problems)) p.fail(at, "ill-formed trace: " + problems.front());
}

}  // namespace

PropertySpec parse_property(const std::string& text, const ComposedSystem& sys) {
  Parser p(text);
  PropertySpec prop;
  p.expect("property");
  prop.name = p.ident("a property name").text;
  if (p.accept("reach")) {
    if (p.at("trans") && p.peek(1).text == "(") {
      p.take();
      p.expect("(");
      auto g = p.ident("a transition name");
      if (!sys.find(g.text)) p.fail(g, "unknown transition '" + g.text + "'");
      p.expect(")");
      prop.kind = PropertySpec::Kind::ReachTransition;
      prop.transition = g.text;
    } else {
      auto f = p.formula();
      prop.kind = PropertySpec::Kind::ReachPredicate;
      prop.predicate = resolve(f, sys.signature());
      for (const auto& v : vocabulary(prop.predicate))
        if (v.primed) throw ParseError(f.line, f.column, "reachability predicates are current-state");
    }
    p.expect(";");
  } else if (p.accept("termination")) {
    prop.kind = PropertySpec::Kind::Termination;
    p.expect(";");
  } else if (p.at("violation")) {
    auto at = p.take();
    prop.kind = PropertySpec::Kind::Violation;
    p.expect("{");
    ConcurrentTrace stem, cycle;
    std::vector<std::pair<Token, std::string>> stem_ends, cycle_ends;
    bool has_cycle = false;
    Token cycle_at = at;
    while (!p.accept("}")) {
      if (p.at_end()) p.fail("unterminated violation pattern");
      if (p.at("cycle")) {
        cycle_at = p.take();
        if (has_cycle) p.fail(cycle_at, "only one cycle block is allowed");
        has_cycle = true;
        p.expect("{");
        while (!p.accept("}")) {
          if (p.at_end()) p.fail("unterminated cycle block");
          parse_trace_items(p, cycle, sys, cycle_ends);
        }
        continue;
      }
      parse_trace_items(p, stem, sys, stem_ends);
    }
    check_trace(p, at, stem, stem_ends);
    if (has_cycle) {
      check_trace(p, cycle_at, cycle, cycle_ends);
      for (const auto& e : cycle.events())
        if (stem.has_event(e.id)) p.fail(cycle_at, "event '" + e.id + "' is both in stem and cycle");
      prop.patterns.push_back(InfiniteTrace{stem, cycle, {}, false});
    } else {
      prop.patterns.push_back(stem);
    }
    p.accept(";");
  } else {
    p.fail("expected 'reach', 'termination' or 'violation' but found " + p.describe(p.peek()));
  }
  if (!p.at_end()) p.fail("unexpected " + p.describe(p.peek()) + " after property");
  return prop;
}

namespace {

void render_items(std::ostringstream& os, const ConcurrentTrace& t, const ComposedSystem& sys,
                  const std::string& indent) {
  const Formula init = prime(sys.init());
  for (const auto& e : t.events())
    os << indent << "event " << e.id << ": " << (e.label == init ? "init" : to_string(e.label)) << ";\n";
  for (const auto& l : t.links()) {
    os << indent << "link " << l.src << " -> " << l.tgt;
    if (!l.label.is_true()) os << " label " << to_string(l.label);
    os << ";\n";
  }
  for (const auto& c : t.conflicts()) os << indent << "conflict " << c.a << " # " << c.b << ";\n";
}

}  // namespace

std::string render_property(const PropertySpec& prop, const ComposedSystem& sys) {
  std::ostringstream os;
  os << "property " << prop.name << " ";
  switch (prop.kind) {
    case PropertySpec::Kind::ReachTransition:
      os << "reach trans(" << prop.transition << ");\n";
      break;
    case PropertySpec::Kind::ReachPredicate:
      os << "reach " << to_string(prop.predicate) << ";\n";
      break;
    case PropertySpec::Kind::Termination:
      os << "termination;\n";
      break;
    case PropertySpec::Kind::Violation: {
      os << "violation {\n";
      if (!prop.patterns.empty()) {
        if (const auto* c = std::get_if<ConcurrentTrace>(&prop.patterns.front())) {
          render_items(os, *c, sys, "  ");
        } else {
          const auto& i = std::get<InfiniteTrace>(prop.patterns.front());
          render_items(os, i.stem, sys, "  ");
          os << "  cycle {\n";
          render_items(os, i.cycle, sys, "    ");
          os << "  }\n";
        }
      }
      os << "}\n";
      break;
    }
  }
  return os.str();
}

}  // namespace causal
