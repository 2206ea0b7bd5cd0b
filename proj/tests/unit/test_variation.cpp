#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "rmp/variation.hpp"

using namespace rmp;
using namespace rmp::testing;

namespace {

ControlProcess wave(std::size_t steps, double level, double amp, double freq) {
  std::vector<double> v(steps);
  for (std::size_t s = 0; s < steps; ++s) v[s] = level + amp * std::sin(freq * static_cast<double>(s));
  return ControlProcess(steps, 1, v);
}

double max_abs(const PathField& f) {
  double m = 0.0;
  for (double v : f.data()) m = std::max(m, std::abs(v));
  return m;
}

// b = v, sigma = 1, f = cx x + cv v, Phi = c x.
Closures constant_partials(double cx, double cv, double c) {
  Closures k;
  k.drift = [](double, const Point& at) { return at.v[0]; };
  k.diffusion = [](double, double, double, double) { return 1.0; };
  k.generator = [cx, cv](double, const Point& at) { return cx * at.x[0] + cv * at.v[0]; };
  k.terminal = [c](double, double x, double) { return c * x; };
  return k;
}

}  // namespace

TEST_CASE("zero perturbation gives zero variations") {
  const ScenarioSpec s = small("risk_sensitive", 3000, 20);
  const auto w = noise_for(s);
  const ControlProcess vbar = s.default_control();
  const StateSolution st = solve_state(s, 1.0, vbar, w);
  const VariationalSolution var = solve_variational(s, st, vbar, w);
  CHECK(max_abs(var.x1) == 0.0);
  CHECK(max_abs(var.yz.y) == 0.0);
  CHECK(max_abs(var.yz.z) == 0.0);
  const DeltaProcesses d = delta_processes(s, st, var, vbar, 0.1, w);
  CHECK(max_abs(d.dx) == 0.0);
  CHECK(max_abs(d.dy) == 0.0);
  CHECK(max_abs(d.dz) == 0.0);
}

TEST_CASE("variational state of a pure control integral") {
  const ScenarioSpec s = closure_spec(constant_partials(0.0, 0.0, 0.0), 20, 500);
  const auto w = noise_for(s);
  const ControlProcess vbar = s.default_control();
  const ControlProcess v = wave(20, 0.2, 0.5, 0.4);
  const StateSolution st = solve_state(s, 1.0, vbar, w);
  const PathField x1 = solve_variational_sde(s, st, v, w);
  double integral = 0.0;
  for (std::size_t i = 0; i < 20; ++i) integral += v.at(i)[0] * s.grid.dt();
  for (std::size_t p = 0; p < 500; ++p) {
    CHECK(x1(0, p) == 0.0);
    CHECK(x1(20, p) == doctest::Approx(integral).epsilon(1e-12));
  }
}

TEST_CASE("variational BSDE with constant partials") {
  const double cx = 0.3, cv = -0.7, c = 1.5;
  const ScenarioSpec s = closure_spec(constant_partials(cx, cv, c), 20, 2000);
  const auto w = noise_for(s);
  const ControlProcess vbar = s.default_control();
  const ControlProcess v = wave(20, 0.1, 0.4, 0.3);
  const StateSolution st = solve_state(s, 1.0, vbar, w);
  const VariationalSolution var = solve_variational(s, st, v, w);
  const double dt = s.grid.dt();
  std::vector<double> x1(21, 0.0);
  for (std::size_t i = 0; i < 20; ++i) x1[i + 1] = x1[i] + v.at(i)[0] * dt;
  double y1 = c * x1[20];
  for (std::size_t i = 0; i < 20; ++i) y1 += (cx * x1[i] + cv * v.at(i)[0]) * dt;
  CHECK(var.yz.y0() == doctest::Approx(y1).epsilon(1e-8));
  std::vector<double> phix(1), phixm(1);
  for (std::size_t p = 0; p < 2000; ++p) {
    s.coef().terminal_dx(1.0, st.forward.x.row(20, p), st.forward.mean_at(20), phix);
    s.coef().terminal_dxm(1.0, st.forward.x.row(20, p), st.forward.mean_at(20), phixm);
    CHECK(var.yz.y(20, p) == phix[0] * var.x1(20, p) + phixm[0] * var.x1.mean(20));
  }
}

TEST_CASE("variational map is linear in the perturbation") {
  const ScenarioSpec s = small("lq_robust", 2000, 20);
  const auto w = noise_for(s);
  const ControlProcess vbar = wave(20, 0.1, 0.2, 0.5);
  const ControlProcess v1 = wave(20, -0.4, 0.5, 0.2), v2 = wave(20, 0.6, 0.3, 0.9);
  const double a = 0.3;
  ControlProcess mix = vbar;
  for (std::size_t i = 0; i < 20; ++i)
    mix.at(i)[0] = vbar.at(i)[0] + a * (v1.at(i)[0] - vbar.at(i)[0]) + (1 - a) * (v2.at(i)[0] - vbar.at(i)[0]);
  const StateSolution st = solve_state(s, 1.0, vbar, w);
  const PathField x1 = solve_variational_sde(s, st, v1, w);
  const PathField x2 = solve_variational_sde(s, st, v2, w);
  const PathField xm = solve_variational_sde(s, st, mix, w);
  double err = 0.0;
  for (std::size_t k = 0; k < xm.data().size(); ++k)
    err = std::max(err, std::abs(xm.data()[k] - (a * x1.data()[k] + (1 - a) * x2.data()[k])));
  CHECK(err < 1e-12);
}

TEST_CASE("finite-difference oracles for the variations") {
  SUBCASE("state on the LQ scenario") {
    const ScenarioSpec s = small("lq_robust", 2000, 20);
    const auto w = noise_for(s);
    const ControlProcess vbar = s.default_control();
    const ControlProcess v = wave(20, 0.5, 0.5, 0.3);
    const double lam = 1e-3;
    const StateSolution st = solve_state(s, 2.0, vbar, w);
    const PathField x1 = solve_variational_sde(s, st, v, w);
    const PathEnsemble moved = solve_forward(s, 2.0, vbar.toward(v, lam), w);
    double err = 0.0, scale = 0.0;
    for (std::size_t p = 0; p < 2000; ++p) {
      err = std::max(err, std::abs((moved.x(20, p) - st.forward.x(20, p)) / lam - x1(20, p)));
      scale = std::max(scale, std::abs(x1(20, p)));
    }
    CHECK(err < 1e-6 * scale);
  }
  SUBCASE("initial value on the risk-sensitive scenario") {
    const ScenarioSpec s = small("risk_sensitive", 5000, 20);
    const auto w = noise_for(s);
    const ControlProcess vbar = s.default_control();
    const ControlProcess v = wave(20, 0.3, 0.5, 0.3);
    const double lam = 1e-3;
    const StateSolution st = solve_state(s, 1.0, vbar, w);
    const VariationalSolution var = solve_variational(s, st, v, w);
    const StateSolution moved = solve_state(s, 1.0, vbar.toward(v, lam), w);
    const double quotient = (moved.backward.y0() - st.backward.y0()) / lam;
    CHECK(quotient == doctest::Approx(var.yz.y0()).epsilon(0.02));
  }
}

TEST_CASE("delta processes") {
  SUBCASE("linear dynamics leave no state remainder") {
    const ScenarioSpec s = small("lq_robust", 2000, 20);
    const auto w = noise_for(s);
    const ControlProcess vbar = s.default_control();
    const ControlProcess v = wave(20, 0.3, 0.5, 0.2);
    const StateSolution st = solve_state(s, 1.0, vbar, w);
    const VariationalSolution var = solve_variational(s, st, v, w);
    for (double lam : {0.2, 0.05}) CHECK(max_abs(delta_processes(s, st, var, v, lam, w).dx) < 1e-10);
  }
  SUBCASE("risk-sensitive state remainder shrinks with lambda") {
    const ScenarioSpec s = small("risk_sensitive", 4000, 20);
    const auto w = noise_for(s);
    const ControlProcess vbar = s.default_control();
    const ControlProcess v = wave(20, 0.3, 0.5, 0.2);
    const StateSolution st = solve_state(s, 1.0, vbar, w);
    const VariationalSolution var = solve_variational(s, st, v, w);
    double prev = INFINITY;
    for (double lam : {0.2, 0.1, 0.05}) {
      const DeltaNorms n = delta_norms(delta_processes(s, st, var, v, lam, w), {}, 2.0, s.grid);
      CHECK(n.x < prev);
      prev = n.x;
    }
  }
}

TEST_CASE("unit weight collapses the weighted norms") {
  Closures k = constant_partials(0.3, 0.2, 1.0);
  k.generator = [](double, const Point& at) { return 0.5 * at.y * at.y / (1 + at.y * at.y) + at.v[0] * at.x[0]; };
  const ScenarioSpec s = closure_spec(k, 20, 2000);
  const auto w = noise_for(s);
  const ControlProcess vbar = s.default_control();
  const ControlProcess v = wave(20, 0.3, 0.5, 0.2);
  const StateSolution st = solve_state(s, 1.0, vbar, w);
  const PathField gamma = doleans_dade(z_sensitivity(s, st), w);
  for (double g : gamma.data()) REQUIRE(g == 1.0);
  const VariationalSolution var = solve_variational(s, st, v, w);
  const DeltaProcesses d = delta_processes(s, st, var, v, 0.1, w);
  const DeltaNorms a = delta_norms(d, gamma, 1.5, s.grid), b = delta_norms(d, {}, 1.5, s.grid);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  CHECK(a.z == b.z);
}

TEST_CASE("weight process is positive and starts at one") {
  const ScenarioSpec s = small("risk_sensitive", 2000, 20);
  const auto w = noise_for(s);
  const StateSolution st = solve_state(s, 2.0, s.default_control(), w);
  const PathField gamma = doleans_dade(z_sensitivity(s, st), w);
  for (std::size_t p = 0; p < 2000; ++p) {
    CHECK(gamma(0, p) == 1.0);
    for (std::size_t i = 0; i <= 20; ++i) REQUIRE(gamma(i, p) > 0.0);
  }
}

TEST_CASE("sweep arguments and slope fit") {
  const ScenarioSpec s = small("risk_sensitive", 1000, 10);
  const auto w = noise_for(s);
  const ControlProcess vbar = s.default_control();
  const ControlProcess v = wave(10, 0.3, 0.5, 0.2);
  CHECK_THROWS_AS(convergence_sweep(s, {1.0}, vbar, v, {0.2, 0.1}, 2.5, w), DomainError);
  CHECK_THROWS_AS(convergence_sweep(s, {1.0}, vbar, v, {0.1, 0.2}, 1.8, w), DomainError);
  const auto band = exponent_band(INFINITY);
  CHECK(band.first == 1.0);
  CHECK(band.second == 2.0);
  CHECK(exponent_band(1.5).first == doctest::Approx(2.2 / 1.5));
  CHECK(loglog_slope({0.2, 0.1, 0.05}, {0.4, 0.1, 0.025}) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::isnan(loglog_slope({0.2, 0.1}, {0.0, 1.0})));
}
