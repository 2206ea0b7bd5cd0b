#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "rmp/scenario.hpp"

using namespace rmp;
using namespace rmp::testing;

TEST_CASE("built-in scenarios load and validate") {
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    const ScenarioSpec s = builtin_scenario(name);
    CHECK(s.family == name);
    CHECK(validate_assumptions(s).all_passed());
  }
}

TEST_CASE("risk-sensitive generator is kappa/2 |z|^2") {
  const ScenarioSpec s = builtin_scenario("risk_sensitive", R"({"params": {"kappa": 1.0}})");
  std::vector<double> x{0.3}, xm{0.1}, z{0.7}, v{0.2};
  const double f = s.coef().generator(1.0, Point{0.4, x, xm, 0.5, z, v});
  CHECK(f == doctest::Approx(0.5 * 0.49).epsilon(1e-14));
  CHECK(s.theta.size() == 2);
  CHECK(s.theta[0].coord == 1.0);
  CHECK(s.theta[1].coord == 2.0);
}

TEST_CASE("two unit vertices give the full simplex") {
  const ScenarioSpec s = builtin_scenario("lq_robust");
  const auto simplex = MeasurePolytope::simplex(2);
  REQUIRE(s.polytope.size() == 2);
  CHECK(s.polytope.vertices() == simplex.vertices());
}

TEST_CASE("a vertex summing to 0.9 is rejected") {
  CHECK_THROWS_AS(builtin_scenario("lq_robust", R"({"polytope": {"vertices": [[0.9, 0.0], [0.0, 1.0]]}})"),
                  ValidationError);
}

TEST_CASE("malformed documents raise configuration errors") {
  CHECK_THROWS_AS(load_scenario("{not json"), ConfigError);
  CHECK_THROWS_AS(load_scenario(R"({"scenario": "lq_robust", "bogus": 1})"), ConfigError);
  CHECK_THROWS_AS(load_scenario("no_such_family"), ConfigError);
  CHECK_THROWS_AS(builtin_scenario("lq_robust", R"({"controls": {"lower": [1.0], "upper": [0.0]}})"), ConfigError);
}

TEST_CASE("serialize round-trips every numeric field") {
  for (const auto& name : builtin_names()) {
    const ScenarioSpec a = builtin_scenario(name, R"({"grid": {"steps": 37}, "monte_carlo": {"seed": 123}})");
    const ScenarioSpec b = load_scenario(serialize(a));
    CHECK(serialize(a) == serialize(b));
    CHECK(b.grid.n_steps == 37);
    CHECK(b.seed == 123);
    CHECK(b.params_json == a.params_json);
    CHECK(b.constants.c1 == a.constants.c1);
  }
}

TEST_CASE("theta metric axioms on all triples") {
  ThetaSpace t({{"a", 0.0}, {"b", 1.5}, {"c", -2.0}, {"d", 0.25}});
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(t.distance(i, j) == t.distance(j, i));
      CHECK((t.distance(i, j) == 0.0) == (i == j));
      for (std::size_t k = 0; k < 4; ++k) CHECK(t.distance(i, k) <= t.distance(i, j) + t.distance(j, k) + 1e-15);
    }
}

TEST_CASE("vertices are probability vectors") {
  for (const auto& name : builtin_names()) {
    const ScenarioSpec s = builtin_scenario(name);
    for (const auto& v : s.polytope.vertices()) {
      double sum = 0.0;
      for (double w : v) {
        CHECK(w >= 0.0);
        sum += w;
      }
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("box projection is feasible, idempotent and nearest") {
  ControlSpace box({-1.0, 0.0}, {1.0, 2.0});
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 3.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int it = 0; it < 200; ++it) {
    std::vector<double> a{n(rng), n(rng)}, p = a;
    box.project(p);
    CHECK(box.contains(p));
    std::vector<double> pp = p;
    box.project(pp);
    CHECK(pp == p);
    const double dp = std::hypot(p[0] - a[0], p[1] - a[1]);
    for (int k = 0; k < 20; ++k) {
      std::vector<double> b{-1.0 + 2.0 * u(rng), 2.0 * u(rng)};
      CHECK(dp <= std::hypot(b[0] - a[0], b[1] - a[1]) + 1e-12);
    }
  }
}

TEST_CASE("control values stay in the box") {
  const ScenarioSpec s = builtin_scenario("risk_sensitive");
  const ControlProcess v = s.default_control();
  for (std::size_t i = 0; i < v.n_steps(); ++i) CHECK(s.controls.contains(v.at(i)));
}

TEST_CASE("finite differences") {
  CHECK(std::abs(finite_diff_partial([](double x) { return x * x; }, 3.0, 1e-5) - 6.0) < 1e-9);
  const double h = 1e-5;
  CHECK(std::abs(finite_diff_partial([](double x) { return std::sin(x); }, 0.0, h) - 1.0) < h * h);
  CHECK(finite_diff_partial([](double) { return 2.5; }, 0.7, 1e-5) == 0.0);
  CHECK_THROWS_AS(finite_diff_partial([](double x) { return x; }, 0.0, 0.0), NumericError);
}

TEST_CASE("analytic partials of built-ins agree with central differences") {
  const double h = 1e-5;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    const ScenarioSpec s = builtin_scenario(name);
    const auto& c = s.coef();
    REQUIRE(c.analytic_partials());
    for (int it = 0; it < 50; ++it) {
      const double th = s.theta[static_cast<std::size_t>(it) % s.theta.size()].coord;
      std::vector<double> x{u(rng)}, xm{u(rng)}, z{u(rng)}, v{0.5 * (1.0 + u(rng))};
      const double y = u(rng), t = 0.5 * (1.0 + u(rng));
      auto at = [&](double dx, double dxm, double dy, double dz, double dv) {
        static thread_local std::vector<double> X(1), M(1), Z(1), V(1);
        X[0] = x[0] + dx, M[0] = xm[0] + dxm, Z[0] = z[0] + dz, V[0] = v[0] + dv;
        return Point{t, X, M, y + dy, Z, V};
      };
      auto check = [&](double analytic, const std::function<double(double)>& fn) {
        const double fd = (fn(h) - fn(-h)) / (2.0 * h);
        CHECK(std::abs(analytic - fd) <= 10.0 * h * h * (1.0 + std::abs(fd)) + 1e-8);
      };
      const Point p0{t, x, xm, y, z, v};
      std::vector<double> out(1);
      c.generator_dx(th, p0, out);
      check(out[0], [&](double e) { return c.generator(th, at(e, 0, 0, 0, 0)); });
      c.generator_dz(th, p0, out);
      check(out[0], [&](double e) { return c.generator(th, at(0, 0, 0, e, 0)); });
      c.generator_dv(th, p0, out);
      check(out[0], [&](double e) { return c.generator(th, at(0, 0, 0, 0, e)); });
      check(c.generator_dy(th, p0), [&](double e) { return c.generator(th, at(0, 0, e, 0, 0)); });
      c.drift_dx(th, p0, out);
      check(out[0], [&](double e) { std::vector<double> o(1); c.drift(th, at(e, 0, 0, 0, 0), o); return o[0]; });
      c.drift_dxm(th, p0, out);
      check(out[0], [&](double e) { std::vector<double> o(1); c.drift(th, at(0, e, 0, 0, 0), o); return o[0]; });
      c.drift_dv(th, p0, out);
      check(out[0], [&](double e) { std::vector<double> o(1); c.drift(th, at(0, 0, 0, 0, e), o); return o[0]; });
      c.terminal_dx(th, x, xm, out);
      check(out[0], [&](double e) { std::vector<double> a{x[0] + e}; return c.terminal(th, a, xm); });
      c.terminal_dxm(th, x, xm, out);
      check(out[0], [&](double e) { std::vector<double> a{xm[0] + e}; return c.terminal(th, x, a); });
      c.terminal_cost_dx(th, x, out);
      check(out[0], [&](double e) { std::vector<double> a{x[0] + e}; return c.terminal_cost(th, a); });
      check(c.initial_cost_dy(th, y), [&](double e) { return c.initial_cost(th, y + e); });
    }
  }
}

TEST_CASE("assumption checks on closure coefficients") {
  Closures ok;
  ok.drift = [](double, const Point& a) { return -0.5 * a.x[0] + a.v[0]; };
  ok.diffusion = [](double, double, double, double) { return 0.3; };
  ok.generator = [](double, const Point& a) { return 0.5 * a.z[0] * a.z[0]; };
  ok.terminal = [](double th, double x, double) { return std::tanh(x) + th; };
  ok.terminal_cost = [](double, double x) { return 0.5 * x * x; };
  ScenarioSpec s = closure_spec(ok, 10, 100, {1.0, 2.0});
  s.constants.c0 = 1.0;
  s.constants.c1 = 1.0;
  s.constants.c2 = 1.0;
  s.constants.l1 = 1.01;
  s.constants.l2 = 1.0;
  s.constants.terminal_bound = 3.0;
  const AssumptionReport good = validate_assumptions(s);
  for (const auto& c : good.checks) {
    CAPTURE(c.name);
    CAPTURE(c.witness);
    CHECK(c.passed);
  }

  Closures cubic = ok;
  cubic.generator = [](double, const Point& a) { return a.z[0] * a.z[0] * a.z[0]; };
  ScenarioSpec bad = s;
  bad.coefficients = std::make_shared<ClosureCoefficients>(cubic);
  bad.constants.c1 = 100.0;
  const AssumptionReport rep = validate_assumptions(bad);
  REQUIRE(rep.first_failure() != nullptr);
  CHECK(rep.first_failure()->name.find("quadratic growth of f in z") != std::string::npos);
}

TEST_CASE("a terminal shifted by theta is parameter-Lipschitz with C2 = 1") {
  Closures c;
  c.terminal = [](double th, double, double) { return th; };
  ScenarioSpec s = closure_spec(c, 10, 100, {1.0, 2.0});
  s.constants.c2 = 1.0;
  s.constants.terminal_bound = 2.0;
  for (const auto& chk : validate_assumptions(s).checks)
    if (chk.name.find("C2") != std::string::npos) CHECK(chk.passed);
}
