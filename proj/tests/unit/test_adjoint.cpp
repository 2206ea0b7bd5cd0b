#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "fixtures.hpp"
#include "rmp/adjoint.hpp"

using namespace rmp;
using namespace rmp::testing;

namespace {

double max_abs(const PathField& f) {
  double m = 0.0;
  for (double v : f.data()) m = std::max(m, std::abs(v));
  return m;
}

Closures unit_noise() {
  Closures c;
  c.diffusion = [](double, double, double, double) { return 1.0; };
  return c;
}

ControlProcess wave(std::size_t steps, double level, double amp) {
  std::vector<double> v(steps);
  for (std::size_t s = 0; s < steps; ++s) v[s] = level + amp * std::sin(0.3 * static_cast<double>(s));
  return ControlProcess(steps, 1, v);
}

}  // namespace

TEST_CASE("first adjoint component") {
  SUBCASE("zero initial cost slope") {
    Closures c = unit_noise();
    c.generator = [](double, const Point& at) { return 0.5 * at.z[0] * at.z[0]; };
    c.terminal = [](double, double x, double) { return std::tanh(x); };
    c.initial_cost = [](double, double) { return 0.0; };
    const ScenarioSpec s = closure_spec(c, 10, 1000);
    const auto w = noise_for(s);
    const StateSolution st = solve_state(s, 1.0, s.default_control(), w);
    CHECK(max_abs(solve_adjoint_p(s, st, w)) == 0.0);
  }
  SUBCASE("generator free of y and z") {
    Closures c = unit_noise();
    c.generator = [](double, const Point& at) { return at.x[0]; };
    c.terminal = [](double, double x, double) { return std::tanh(x); };
    const ScenarioSpec s = closure_spec(c, 10, 1000);
    const auto w = noise_for(s);
    const StateSolution st = solve_state(s, 1.0, s.default_control(), w);
    const PathField p = solve_adjoint_p(s, st, w);
    for (double v : p.data()) CHECK(v == doctest::Approx(-1.0).epsilon(1e-9));
  }
  SUBCASE("initial value and sign on the risk-sensitive scenario") {
    const ScenarioSpec s = small("risk_sensitive", 3000, 20);
    const auto w = noise_for(s);
    const StateSolution st = solve_state(s, 2.0, s.default_control(), w);
    const PathField p = solve_adjoint_p(s, st, w);
    const double p0 = -s.coef().initial_cost_dy(2.0, st.backward.y0());
    for (std::size_t path = 0; path < 3000; ++path) {
      CHECK(p(0, path) == p0);
      for (std::size_t i = 0; i <= 20; ++i) REQUIRE(p(i, path) * p0 > 0.0);
    }
  }
}

TEST_CASE("second adjoint component") {
  SUBCASE("constant terminal") {
    Closures c = unit_noise();
    c.terminal_cost = [](double, double x) { return 0.8 * x; };
    const ScenarioSpec s = closure_spec(c, 20, 2000);
    const auto w = noise_for(s);
    const StateSolution st = solve_state(s, 1.0, s.default_control(), w);
    const AdjointTriple a = solve_adjoint(s, st, w);
    for (double v : a.q.data()) CHECK(v == doctest::Approx(0.8).epsilon(1e-8));
    CHECK(max_abs(a.r) < 1e-8);
  }
  SUBCASE("linear drift") {
    Closures c = unit_noise();
    c.drift = [](double, const Point& at) { return -0.6 * at.x[0]; };
    c.terminal_cost = [](double, double x) { return 0.8 * x; };
    const ScenarioSpec s = closure_spec(c, 50, 2000);
    const auto w = noise_for(s);
    const StateSolution st = solve_state(s, 1.0, s.default_control(), w);
    const AdjointTriple a = solve_adjoint(s, st, w);
    CHECK(a.q.mean(0) == doctest::Approx(0.8 * std::exp(-0.6)).epsilon(0.01));
  }
  SUBCASE("terminal identity on the risk-sensitive scenario") {
    const ScenarioSpec s = small("risk_sensitive", 3000, 20);
    const auto w = noise_for(s);
    const StateSolution st = solve_state(s, 1.0, s.default_control(), w);
    const AdjointTriple a = solve_adjoint(s, st, w);
    const auto mT = st.forward.mean_at(20);
    std::vector<double> px(1), pxm(1), phix(1);
    double coupling = 0.0;
    for (std::size_t p = 0; p < 3000; ++p) {
      s.coef().terminal_dxm(1.0, st.forward.x.row(20, p), mT, pxm);
      coupling += pxm[0] * a.p(20, p);
    }
    coupling /= 3000.0;
    for (std::size_t p = 0; p < 3000; ++p) {
      s.coef().terminal_dx(1.0, st.forward.x.row(20, p), mT, px);
      s.coef().terminal_cost_dx(1.0, st.forward.x.row(20, p), phix);
      CHECK(a.q(20, p) == doctest::Approx(-px[0] * a.p(20, p) - coupling + phix[0]).epsilon(1e-12));
    }
  }
}

TEST_CASE("hamiltonian") {
  const ScenarioSpec s = builtin_scenario("lq_robust");
  const std::vector<double> x{0.4}, xm{0.2}, z{0.3}, v{-0.5}, zero{0.0};
  const Point at{0.3, x, xm, 0.1, z, v};
  CHECK(hamiltonian(s, 1.0, at, 0.0, zero, zero) == 0.0);
  const std::vector<double> q{0.7}, r{-0.2}, q2{1.4}, r2{-0.4};
  CHECK(hamiltonian(s, 2.0, at, 2.0 * 0.9, q2, r2) ==
        doctest::Approx(2.0 * hamiltonian(s, 2.0, at, 0.9, q, r)).epsilon(1e-14));

  Closures c;
  c.drift = [](double, const Point& p) { return p.v[0]; };
  const ScenarioSpec lin = closure_spec(c);
  const std::vector<double> one{1.0};
  CHECK(hamiltonian(lin, 1.0, at, 0.0, one, zero) == -0.5);
  std::vector<double> g(1);
  hamiltonian_dv(lin, 1.0, at, 0.0, one, zero, g);
  CHECK(g[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("control gradient matches finite differences of the hamiltonian") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double h = 1e-5;
  for (const std::string& name : builtin_names()) {
    const ScenarioSpec s = builtin_scenario(name);
    for (int trial = 0; trial < 20; ++trial) {
      const std::vector<double> x{u(rng)}, xm{u(rng)}, z{u(rng)}, q{u(rng)}, r{u(rng)};
      const double lo = s.controls.lower()[0], hi = s.controls.upper()[0];
      std::vector<double> v{0.5 * (lo + hi) + 0.3 * (hi - lo) * u(rng)};
      const double p = u(rng), y = u(rng);
      std::vector<double> g(1);
      hamiltonian_dv(s, 1.5, Point{0.4, x, xm, y, z, v}, p, q, r, g);
      std::vector<double> vp{v[0] + h}, vm{v[0] - h};
      const double fd = (hamiltonian(s, 1.5, Point{0.4, x, xm, y, z, vp}, p, q, r) -
                         hamiltonian(s, 1.5, Point{0.4, x, xm, y, z, vm}, p, q, r)) /
                        (2.0 * h);
      CAPTURE(name);
      CHECK(std::abs(fd - g[0]) <= 10.0 * h * h * (1.0 + std::abs(g[0])) + 1e-10);
    }
  }
}

TEST_CASE("gradient vanishes when the control does not enter") {
  Closures c = unit_noise();
  c.drift = [](double, const Point& at) { return -at.x[0]; };
  c.generator = [](double, const Point& at) { return 0.5 * at.z[0] * at.z[0] + 0.1 * at.x[0]; };
  c.terminal = [](double, double x, double) { return std::sin(x); };
  c.terminal_cost = [](double, double x) { return x * x; };
  const ScenarioSpec s = closure_spec(c, 10, 1000);
  const auto w = noise_for(s);
  const StateSolution st = solve_state(s, 1.0, s.default_control(), w);
  const PathField lam = lambda_gradient(s, st, solve_adjoint(s, st, w));
  CHECK(max_abs(lam) < 1e-8);
}

TEST_CASE("first-order condition at the LQ optimum") {
  const auto js = nlohmann::json::parse(std::ifstream(std::string(RMP_TEST_DATA) + "/lq_robust_oracle.json"));
  const std::vector<double> oc = js["control"].get<std::vector<double>>();
  const double w1 = js["weight_theta1"].get<double>();
  ScenarioSpec s = builtin_scenario("lq_robust");
  s.n_paths = 20000;
  const ControlProcess vopt(50, 1, oc);
  // The regression error in E_i[q_{i+1}] is shared by all paths, so the
  // standard error is taken across independent replications.
  const std::size_t reps = 6;
  std::vector<std::vector<double>> d(50);
  for (std::size_t k = 0; k < reps; ++k) {
    const auto w = sample_brownian(s.grid, s.n_paths, 1, 100 + k);
    std::vector<GradientMean> g;
    for (double th : {1.0, 2.0}) {
      const StateSolution st = solve_state(s, th, vopt, w);
      g.push_back(gradient_mean(lambda_gradient(s, st, solve_adjoint(s, st, w))));
    }
    for (std::size_t i = 0; i < 50; ++i) d[i].push_back(w1 * g[0].mean[i] + (1.0 - w1) * g[1].mean[i]);
  }
  for (std::size_t i = 0; i < 50; ++i) {
    CAPTURE(i);
    const MeanAndError m = sample_mean(d[i]);
    CHECK(std::abs(m.mean) < 3.0 * m.se);
  }
}

TEST_CASE("duality check") {
  const ScenarioSpec s = small("risk_sensitive", 3000, 20);
  const auto w = noise_for(s);
  const ControlProcess vbar = s.default_control();
  SUBCASE("zero perturbation") {
    const DualityResult d = duality_check(s, 1.0, vbar, vbar, w);
    CHECK(std::abs(d.lhs) <= 3.0 * d.lhs_se + 1e-14);
    CHECK(std::abs(d.rhs) <= 3.0 * d.rhs_se + 1e-14);
  }
  SUBCASE("random perturbation") {
    const DualityResult d = duality_check(s, 1.0, vbar, wave(20, 0.3, 0.4), w);
    CHECK(d.gap < 0.1);
    CHECK(d.gap == doctest::Approx(std::abs(d.lhs - d.rhs) / (std::abs(d.lhs) + std::abs(d.rhs) + 1e-12)));
  }
}

TEST_CASE("parameter continuity probe") {
  SUBCASE("equal parameters") {
    const ScenarioSpec s = small("lq_robust", 2000, 20);
    const auto w = noise_for(s);
    const ThetaGaps g = theta_continuity_probe(s, 1.0, 1.0, s.default_control(), wave(20, 0.3, 0.4), 1.9, w);
    CHECK(g.x == 0.0);
    CHECK(g.y == 0.0);
    CHECK(g.x1 == 0.0);
    CHECK(g.y1 == 0.0);
    CHECK(g.p == 0.0);
    CHECK(g.q == 0.0);
    CHECK(g.r == 0.0);
  }
  SUBCASE("coefficients free of the parameter") {
    Closures c = unit_noise();
    c.drift = [](double, const Point& at) { return at.v[0] - 0.3 * at.x[0]; };
    c.generator = [](double, const Point& at) { return 0.1 * std::sin(at.y) + 0.2 * at.v[0] * at.v[0]; };
    c.terminal = [](double, double x, double) { return std::tanh(x); };
    c.terminal_cost = [](double, double x) { return x * x; };
    const ScenarioSpec s = closure_spec(c, 20, 2000, {1.0, 2.0});
    const auto w = noise_for(s);
    const ThetaGaps g = theta_continuity_probe(s, 1.0, 2.0, s.default_control(), wave(20, 0.3, 0.4), 1.5, w);
    CHECK(g.x == 0.0);
    CHECK(g.y == 0.0);
    CHECK(g.p == 0.0);
    CHECK(g.q == 0.0);
    CHECK(g.r == 0.0);
  }
  SUBCASE("exponent outside the band") {
    const ScenarioSpec s = small("risk_sensitive", 1000, 10);
    const auto w = noise_for(s);
    CHECK_THROWS_AS(theta_continuity_probe(s, 1.0, 1.1, s.default_control(), wave(10, 0.3, 0.4), 2.5, w),
                    DomainError);
  }
}
