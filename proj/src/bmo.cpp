#include "rmp/bmo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rmp {

namespace {

// psi at p = 1 + e; (2p - 1) / (2(p - 1)) = 1 + 1 / (2e).
double psi_excess(double e) {
  const double p = 1.0 + e;
  const double u = std::log1p(0.5 / e) / (p * p);
  return u / (std::sqrt(1.0 + u) + 1.0);
}

}  // namespace

double psi(double p) {
  if (!(p > 1.0)) throw DomainError("psi needs p > 1, got " + std::to_string(p));
  if (std::isinf(p)) return 0.0;
  return psi_excess(p - 1.0);
}

double p_m_from_norm(double norm) {
  if (!(norm >= 0.0)) throw DomainError("BMO norm must be nonnegative");
  if (norm == 0.0) return INFINITY;
  // Bisection in log(p - 1) on (1, 1e12).
  double lo = std::log(1e-300), hi = std::log(1e12 - 1.0);
  if (psi_excess(std::exp(hi)) >= norm) return 1.0 + std::exp(hi);
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (psi_excess(std::exp(mid)) > norm) lo = mid;
    else hi = mid;
    if (hi - lo < 1e-15) break;
  }
  return 1.0 + std::exp(0.5 * (lo + hi));
}

double conjugate_exponent(double p) {
  if (!(p > 1.0)) throw DomainError("conjugate exponent needs p > 1");
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

double reverse_holder_K(double p, double norm) {
  if (!(p > 1.0)) throw DomainError("reverse Hoelder needs p > 1");
  if (!(norm >= 0.0)) throw DomainError("BMO norm must be nonnegative");
  const double pm = p_m_from_norm(norm);
  if (!(p < pm))
    throw DomainError("reverse Hoelder needs p < p_M = " + std::to_string(pm));
  // bracket = num / (2p - 1), kept as one division so integer cases stay exact
  const double num = (2.0 * p - 1.0) - (2.0 * p - 2.0) * std::exp(p * p * (norm * norm + 2.0 * norm));
  const double bracket = num / (2.0 * p - 1.0);
  if (!(bracket > 0.0))
    throw DomainError("reverse Hoelder constant out of validity: bracket " + std::to_string(bracket) +
                      " at p = " + std::to_string(p) + ", norm = " + std::to_string(norm));
  return 2.0 * (2.0 * p - 1.0) / num;
}

double john_nirenberg_bound(double theta, double norm) {
  if (!(norm >= 0.0)) throw DomainError("BMO norm must be nonnegative");
  const double n2 = norm * norm;
  if (!(theta > 0.0) || !(theta * n2 < 1.0))
    throw DomainError("John-Nirenberg needs 0 < theta < norm^-2");
  return 1.0 / (1.0 - theta * n2);
}

BmoEstimate estimate_bmo_norm(const PathField& integrand, const PathField& features,
                              const TimeGrid& grid, const RegressionBasis& basis) {
  const std::size_t N = grid.n_steps, P = integrand.paths(), d = integrand.width();
  if (integrand.nodes() < N) throw ConfigError("integrand does not cover the grid");
  if (features.nodes() < N || features.paths() != P)
    throw ConfigError("features do not match the integrand");
  const double dt = grid.dt();
  BmoEstimate est;
  est.node_sup.assign(N, 0.0);
  std::vector<double> tail(P, 0.0), fitted(P), sorted(P);
  bool all_zero = true;
  double best = 0.0, best_q = 0.0;
  for (std::size_t s = N; s-- > 0;) {
    for (std::size_t p = 0; p < P; ++p) {
      double a2 = 0.0;
      for (std::size_t j = 0; j < d; ++j) a2 += integrand(s, p, j) * integrand(s, p, j);
      if (a2 != 0.0) all_zero = false;
      tail[p] += a2 * dt;
    }
    Projector proj(features.slice(s), features.width(), P, basis);
    proj.project(tail, fitted);
    double mx = 0.0;
    for (std::size_t p = 0; p < P; ++p) {
      fitted[p] = std::max(fitted[p], 0.0);
      mx = std::max(mx, fitted[p]);
    }
    sorted = fitted;
    const std::size_t qi = std::min(P - 1, static_cast<std::size_t>(std::ceil(0.999 * static_cast<double>(P))) - 1);
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(qi), sorted.end());
    est.node_sup[s] = mx;
    best = std::max(best, mx);
    best_q = std::max(best_q, sorted[qi]);
  }
  if (all_zero) {
    est.norm = 0.0;
    est.norm_q999 = 0.0;
    est.p_m = INFINITY;
    est.p_m_conjugate = 1.0;
    return est;
  }
  est.norm = std::sqrt(best);
  est.norm_q999 = std::sqrt(best_q);
  est.p_m = p_m_from_norm(est.norm);
  est.p_m_conjugate = conjugate_exponent(est.p_m);
  return est;
}

PathField doleans_dade_log(const PathField& integrand, const BrownianEnsemble& noise) {
  const std::size_t N = noise.grid().n_steps, P = noise.n_paths(), d = noise.dim();
  if (integrand.nodes() < N || integrand.paths() != P || integrand.width() != d)
    throw ConfigError("integrand does not match the Brownian ensemble");
  const double dt = noise.grid().dt();
  PathField out(N + 1, P, 1);
  for (std::size_t p = 0; p < P; ++p) {
    double acc = 0.0;
    for (std::size_t s = 0; s < N; ++s) {
      double sq = 0.0, lin = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double a = integrand(s, p, j);
        lin += a * noise.increment(s, p, j);
        sq += a * a;
      }
      acc += lin - 0.5 * sq * dt;
      out(s + 1, p) = acc;
    }
  }
  return out;
}

PathField doleans_dade(const PathField& integrand, const BrownianEnsemble& noise) {
  PathField out = doleans_dade_log(integrand, noise);
  for (double& v : out.data()) v = std::exp(v);
  return out;
}

}  // namespace rmp
