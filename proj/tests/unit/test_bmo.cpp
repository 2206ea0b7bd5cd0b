#include <doctest.h>

#include <cmath>
#include <limits>

#include "rmp/bmo.hpp"
#include "rmp/variation.hpp"

using namespace rmp;

namespace {

PathField constant_field(std::size_t nodes, std::size_t paths, double value) {
  return PathField(nodes, paths, 1, value);
}

PathField brownian_features(const BrownianEnsemble& w) {
  PathField f(w.grid().n_steps + 1, w.n_paths(), 1);
  for (std::size_t i = 0; i <= w.grid().n_steps; ++i)
    for (std::size_t p = 0; p < w.n_paths(); ++p) f(i, p) = w.values()(i, p);
  return f;
}

}  // namespace

TEST_CASE("psi values") {
  CHECK(psi(2.0) == doctest::Approx(std::sqrt(1.0 + std::log(1.5) / 4.0) - 1.0).epsilon(1e-14));
  CHECK(psi(2.0) == doctest::Approx(0.049456).epsilon(1e-4));
  CHECK(psi(1e6) < 1e-6);
  CHECK(psi(1.5) > psi(2.0));
  CHECK(psi(2.0) > psi(3.0));
  CHECK_THROWS_AS(psi(1.0), DomainError);
  CHECK_THROWS_AS(psi(0.5), DomainError);
  double prev = psi(1.0 + 99.0 / 100.0 * 0.01);
  for (int i = 1; i <= 100; ++i) {
    const double p = 1.0 + 99.0 * i / 100.0;
    const double v = psi(p);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("p_m round trips") {
  CHECK(std::isinf(p_m_from_norm(0.0)));
  for (double p : {1.1, 1.5, 2.0, 5.0, 50.0}) {
    CAPTURE(p);
    CHECK(std::abs(p_m_from_norm(psi(p)) - p) < 1e-8);
  }
  const double pm = p_m_from_norm(0.3);
  CHECK(std::abs(psi(pm) - 0.3) < 1e-10);
  CHECK(std::abs(1.0 / pm + 1.0 / conjugate_exponent(pm) - 1.0) < 1e-12);
}

TEST_CASE("reverse Hoelder constant") {
  CHECK(reverse_holder_K(2.0, 0.0) == 6.0);
  CHECK(reverse_holder_K(1.1, 0.0) == doctest::Approx(2.4).epsilon(1e-14));
  CHECK_THROWS_AS(reverse_holder_K(2.0, 1.0), DomainError);
  CHECK_THROWS_AS(reverse_holder_K(1.0, 0.0), DomainError);
}

TEST_CASE("John-Nirenberg bound") {
  for (double norm : {0.3, 1.0, 2.5}) {
    CHECK(john_nirenberg_bound(0.5 / (norm * norm), norm) == 2.0);
    CHECK(john_nirenberg_bound(0.9 / (norm * norm), norm) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(john_nirenberg_bound(1e-12, norm) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK_THROWS_AS(john_nirenberg_bound(1.01 / (norm * norm), norm), DomainError);
    CHECK_THROWS_AS(john_nirenberg_bound(0.0, norm), DomainError);
  }
}

TEST_CASE("BMO norm of constant, zero and scaled integrands") {
  const TimeGrid g = make_grid(2.0, 40);
  const auto w = sample_brownian(g, 4000, 1, 21);
  const PathField feat = brownian_features(w);

  const BmoEstimate c = estimate_bmo_norm(constant_field(41, 4000, 0.7), feat, g);
  CHECK(std::abs(c.norm - 0.7 * std::sqrt(2.0)) < 0.05 * 0.7 * std::sqrt(2.0));
  CHECK(std::abs(psi(c.p_m) - c.norm) < 1e-10);

  const BmoEstimate z = estimate_bmo_norm(constant_field(41, 4000, 0.0), feat, g);
  CHECK(z.norm == 0.0);
  CHECK(std::isinf(z.p_m));

  PathField a(41, 4000, 1), a2(41, 4000, 1);
  for (std::size_t i = 0; i < 41; ++i)
    for (std::size_t p = 0; p < 4000; ++p) {
      a(i, p) = std::tanh(w.values()(i, p)) + 0.2;
      a2(i, p) = 2.0 * a(i, p);
    }
  const BmoEstimate one = estimate_bmo_norm(a, feat, g);
  const BmoEstimate two = estimate_bmo_norm(a2, feat, g);
  CHECK(two.norm == doctest::Approx(2.0 * one.norm).epsilon(1e-12));
  CHECK(one.norm_q999 <= one.norm);
}

TEST_CASE("BMO norm of the solved integrand is stable in the path count") {
  ScenarioSpec s = builtin_scenario("risk_sensitive");
  s.grid.n_steps = 20;
  double norms[2];
  std::size_t k = 0;
  for (std::size_t P : {5000u, 10000u}) {
    const auto w = sample_brownian(s.grid, P, 1, 3);
    const StateSolution st = solve_state(s, 1.0, s.default_control(), w);
    const BmoEstimate e = estimate_bmo_norm(st.backward.z, st.forward.x, s.grid);
    CHECK(std::isfinite(e.norm));
    norms[k++] = e.norm;
  }
  CHECK(std::abs(norms[1] - norms[0]) <= 0.1 * norms[0]);
}

TEST_CASE("Doleans-Dade exponential") {
  const TimeGrid g = make_grid(1.0, 25);
  const std::size_t P = 40000;
  const auto w = sample_brownian(g, P, 1, 8);

  const PathField one = doleans_dade(constant_field(26, P, 0.0), w);
  for (double v : one.data()) CHECK(v == 1.0);

  const double alpha = 0.6;
  const PathField e = doleans_dade(constant_field(26, P, alpha), w);
  std::vector<double> terminal(P);
  for (std::size_t p = 0; p < P; ++p) {
    CHECK(e(0, p) == 1.0);
    for (std::size_t i = 0; i <= 25; ++i) REQUIRE(e(i, p) > 0.0);
    const double exact = std::exp(alpha * w.values()(25, p) - 0.5 * alpha * alpha);
    CHECK(e(25, p) == doctest::Approx(exact).epsilon(1e-10));
    terminal[p] = e(25, p);
  }
  const MeanAndError m = sample_mean(terminal);
  CHECK(std::abs(m.mean - 1.0) < 3.0 * m.se);
}
