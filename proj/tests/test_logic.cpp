#include <random>

#include "causal/logic.hpp"
#include "doctest.h"

using namespace causal;

namespace {

Signature sig_xy() {
  Signature s;
  s.integers = {"x", "y", "z"};
  s.locations["loc_P"] = {"s1", "s2", "s3"};
  return s;
}

LinearExpr v(const std::string& n, bool primed = false) { return LinearExpr::variable({n, primed}); }
LinearExpr k(std::int64_t c) { return LinearExpr::number(c); }

LinearExpr operator+(LinearExpr a, const LinearExpr& b) { return a += b; }
LinearExpr operator-(LinearExpr a, const LinearExpr& b) { return a -= b; }

}  // namespace

TEST_CASE("atoms are normalized and rendered") {
  CHECK(to_string(compare(v("x", true), Cmp::Eq, v("x") - k(1))) == "x' = x - 1");
  CHECK(to_string(compare(v("x") + v("x"), Cmp::Le, k(5))) == "x <= 2");
  CHECK(to_string(compare(v("x"), Cmp::Gt, k(0))) == "x >= 1");
  CHECK(to_string(location_is("loc_P", "s1", false, false)) == "loc_P != s1");
  CHECK(to_string(location_frame("loc_P")) == "loc_P' = loc_P");
  CHECK(compare(k(1), Cmp::Le, k(2)).is_true());
  CHECK(compare(k(3), Cmp::Le, k(2)).is_false());
  CHECK_THROWS_AS(compare(v("x"), Cmp::Ne, k(0)), LogicError);
  CHECK(to_string(Formula::top()) == "true");
  CHECK(to_string(Formula::bottom()) == "false");
}

TEST_CASE("conjunction is canonical") {
  auto a = compare(v("x"), Cmp::Ge, k(0));
  auto b = location_is("loc_P", "s2");
  CHECK(conj(a, b) == conj(b, a));
  CHECK(conj(a, a) == a);
  CHECK(conj(a, Formula::bottom()).is_false());
}

TEST_CASE("satisfiability over integers and locations") {
  auto s = sig_xy();
  CHECK(is_satisfiable(conj(compare(v("x"), Cmp::Ge, k(1)), compare(v("x"), Cmp::Le, k(3))), s));
  CHECK_FALSE(is_satisfiable(conj(compare(v("x"), Cmp::Ge, k(3)), compare(v("x"), Cmp::Le, k(2))), s));
  // 2x = 1 has a rational but no integer solution.
  CHECK(check_sat(compare(v("x") + v("x"), Cmp::Eq, k(1)), s) == SatResult::Unsat);
  // Location propagation: three disequalities exhaust the domain.
  auto none = conj(conj(location_is("loc_P", "s1", false, false), location_is("loc_P", "s2", false, false)),
                   location_is("loc_P", "s3", false, false));
  CHECK_FALSE(is_satisfiable(none, s));
  // Frames carry locations across the step.
  auto framed = conj(conj(location_is("loc_P", "s1"), location_frame("loc_P")),
                     location_is("loc_P", "s2", true));
  CHECK_FALSE(is_satisfiable(framed, s));
}

TEST_CASE("implication") {
  auto s = sig_xy();
  CHECK(implies(compare(v("x"), Cmp::Eq, k(2)), compare(v("x"), Cmp::Ge, k(1)), s));
  CHECK_FALSE(implies(compare(v("x"), Cmp::Ge, k(1)), compare(v("x"), Cmp::Eq, k(2)), s));
  CHECK(implies(location_is("loc_P", "s1"), location_is("loc_P", "s2", false, false), s));
  CHECK(implies(Formula::bottom(), location_is("loc_P", "s1"), s));
}

TEST_CASE("pre and post projections") {
  auto s = sig_xy();
  auto step = conj(compare(v("x", true), Cmp::Eq, v("x") - k(1)), compare(v("x"), Cmp::Ge, k(1)));
  CHECK(to_string(pre_state(step, s)) == "x >= 1");
  CHECK(to_string(post_state(step, s)) == "x >= 0");
  CHECK(to_string(prime(location_is("loc_P", "s1"))) == "loc_P' = s1");
  CHECK_THROWS_AS(prime(location_is("loc_P", "s1", true)), LogicError);
  CHECK(unprime(prime(compare(v("y"), Cmp::Le, k(4)))) == compare(v("y"), Cmp::Le, k(4)));
}

TEST_CASE("unsat core is minimal") {
  auto s = sig_xy();
  std::vector<Atom> atoms;
  for (auto f : {compare(v("x"), Cmp::Ge, k(3)), compare(v("y"), Cmp::Ge, k(0)),
                 compare(v("x"), Cmp::Le, k(1))})
    atoms.push_back(f.atoms().front());
  auto core = unsat_core(atoms, s);
  CHECK(core.size() == 2);
  CHECK_THROWS_AS(unsat_core({atoms[1]}, s), LogicError);
}

TEST_CASE("interpolants over the shared vocabulary") {
  auto s = sig_xy();
  auto a = conj(compare(v("x"), Cmp::Eq, k(0)), compare(v("y"), Cmp::Eq, v("x") + k(1)));
  auto b = conj(compare(v("z"), Cmp::Eq, v("y")), compare(v("z"), Cmp::Le, k(0)));
  auto itp = interpolate(a, b, s);
  CHECK(is_interpolant(a, b, itp, s));
  CHECK(to_string(itp) == "y = 1");
  CHECK_THROWS_AS(interpolate(a, compare(v("y"), Cmp::Ge, k(0)), s), LogicError);

  auto la = location_is("loc_P", "s2");
  auto lb = location_is("loc_P", "s1");
  CHECK(to_string(interpolate(la, lb, s)) == "loc_P != s1");
}

TEST_CASE("the observer sees every interpolation") {
  auto s = sig_xy();
  int calls = 0;
  set_interpolation_observer([&](const Formula&, const Formula&, const Formula&) { ++calls; });
  interpolate(compare(v("x"), Cmp::Ge, k(1)), compare(v("x"), Cmp::Le, k(0)), s);
  set_interpolation_observer({});
  interpolate(compare(v("x"), Cmp::Ge, k(1)), compare(v("x"), Cmp::Le, k(0)), s);
  CHECK(calls == 1);
}

TEST_CASE("random unsat pairs yield valid interpolants") {
  auto s = sig_xy();
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> coef(-2, 2), bound(-3, 3), pick(0, 2);
  const char* names[] = {"x", "y", "z"};
  auto random_atom = [&](int shared_bias) {
    LinearExpr e;
    for (int i = 0; i < 2; ++i) e += v(names[(pick(rng) + shared_bias) % 3]).scaled(coef(rng));
    Cmp c = pick(rng) == 0 ? Cmp::Eq : (pick(rng) == 0 ? Cmp::Ge : Cmp::Le);
    return compare(e, c, k(bound(rng)));
  };
  int checked = 0;
  for (int round = 0; round < 20000 && checked < 300; ++round) {
    Formula a, b;
    for (int i = 0; i < 3; ++i) a = conj(a, random_atom(0));
    for (int i = 0; i < 3; ++i) b = conj(b, random_atom(1));
    if (is_satisfiable(conj(a, b), s) || !is_satisfiable(a, s) || !is_satisfiable(b, s)) continue;
    auto itp = interpolate(a, b, s);
    CHECK(is_interpolant(a, b, itp, s));
    ++checked;
  }
  CHECK(checked == 300);
}

TEST_CASE("evaluation reads pre and post states") {
  Valuation pre{{"x", std::int64_t{2}}, {"loc_P", std::string("s1")}};
  Valuation post{{"x", std::int64_t{1}}, {"loc_P", std::string("s2")}};
  auto step = conj(compare(v("x", true), Cmp::Eq, v("x") - k(1)), location_is("loc_P", "s2", true));
  CHECK(eval(step, pre, post));
  CHECK_FALSE(eval(step, post, pre));
  CHECK_THROWS_AS(eval(compare(v("y"), Cmp::Ge, k(0)), pre, post), LogicError);
}
