#include "rmp/forward.hpp"

#include <cmath>
#include <string>

namespace rmp {

namespace {

[[noreturn]] void diverged(std::size_t path, std::size_t step, double value) {
  throw DivergedError("forward state diverged on path " + std::to_string(path) + " at step " +
                      std::to_string(step) + " (value " + std::to_string(value) + ")");
}

}  // namespace

PathEnsemble solve_forward(const ScenarioSpec& spec, double theta, const ControlProcess& control,
                           const BrownianEnsemble& noise) {
  const auto& c = spec.coef();
  const std::size_t n = c.state_dim(), d = c.noise_dim(), k = c.control_dim();
  const TimeGrid& grid = noise.grid();
  const std::size_t N = grid.n_steps, P = noise.n_paths();
  if (noise.dim() != d) throw ConfigError("Brownian dimension differs from the model noise dimension");
  if (control.n_steps() != N || control.dim() != k)
    throw ConfigError("control is not defined on the simulation grid");
  if (spec.x0.size() != n) throw ConfigError("initial state has the wrong dimension");
  const double cap = spec.solver.blowup_cap;
  const double dt = grid.dt();

  PathEnsemble ens;
  ens.theta = theta;
  ens.grid = grid;
  ens.control = control;
  ens.x = PathField(N + 1, P, n);
  ens.mean.assign((N + 1) * n, 0.0);
  if (control.is_feedback()) ens.control_values = PathField(N, P, k);
  for (std::size_t p = 0; p < P; ++p)
    for (std::size_t i = 0; i < n; ++i) ens.x(0, p, i) = spec.x0[i];
  for (std::size_t i = 0; i < n; ++i) ens.mean[i] = spec.x0[i];

  std::vector<double> b(n), sig(n * d), v(k);
  for (std::size_t s = 0; s < N; ++s) {
    const double t = grid.time(s);
    const auto m = ens.mean_at(s);
    for (std::size_t p = 0; p < P; ++p) {
      auto x = ens.x.row(s, p);
      control.evaluate(s, t, x, v);
      if (control.is_feedback()) {
        spec.controls.project(v);
        auto dst = ens.control_values.row(s, p);
        std::copy(v.begin(), v.end(), dst.begin());
      }
      c.drift(theta, Point{t, x, m, 0.0, {}, v}, b);
      c.diffusion(theta, t, x, v, sig);
      auto next = ens.x.row(s + 1, p);
      for (std::size_t i = 0; i < n; ++i) {
        double val = x[i] + b[i] * dt;
        for (std::size_t j = 0; j < d; ++j) val += sig[i * d + j] * noise.increment(s, p, j);
        if (!std::isfinite(val) || std::abs(val) > cap) diverged(p, s, val);
        next[i] = val;
      }
    }
    for (std::size_t i = 0; i < n; ++i) ens.mean[(s + 1) * n + i] = ens.x.mean(s + 1, i);
  }
  return ens;
}

PathField solve_linear_unbounded_sde(const PathField& a1, const PathField& phi1, const PathField& a2,
                                     const PathField& phi2, double x0, const BrownianEnsemble& noise,
                                     double blowup_cap) {
  const std::size_t N = noise.grid().n_steps, P = noise.n_paths(), d = noise.dim();
  const double dt = noise.grid().dt();
  auto check = [&](const PathField& f, std::size_t width, const char* name) {
    if (f.empty()) return;
    if (f.nodes() < N || f.paths() != P || f.width() != width)
      throw ConfigError(std::string("coefficient field ") + name + " has the wrong shape");
  };
  check(a1, 1, "a1");
  check(phi1, 1, "phi1");
  check(a2, d, "a2");
  check(phi2, d, "phi2");
  PathField x(N + 1, P, 1);
  for (std::size_t p = 0; p < P; ++p) {
    double cur = x0;
    x(0, p) = cur;
    for (std::size_t s = 0; s < N; ++s) {
      double drift = 0.0;
      if (!a1.empty()) drift += a1(s, p) * cur;
      if (!phi1.empty()) drift += phi1(s, p);
      double next = cur + drift * dt;
      for (std::size_t j = 0; j < d; ++j) {
        double vol = 0.0;
        if (!a2.empty()) vol += a2(s, p, j) * cur;
        if (!phi2.empty()) vol += phi2(s, p, j);
        next += vol * noise.increment(s, p, j);
      }
      if (!std::isfinite(next) || std::abs(next) > blowup_cap) diverged(p, s, next);
      cur = next;
      x(s + 1, p) = cur;
    }
  }
  return x;
}

StrongError strong_error_probe(const std::function<PathField(const BrownianEnsemble&)>& solve,
                               const BrownianEnsemble& fine) {
  const BrownianEnsemble coarse = fine.coarsened();
  const PathField xf = solve(fine);
  const PathField xc = solve(coarse);
  const std::size_t Nc = coarse.grid().n_steps, P = fine.n_paths(), w = xf.width();
  if (xc.width() != w || xf.paths() != P || xc.paths() != P)
    throw ConfigError("strong_error_probe: solver outputs have inconsistent shapes");
  double s_term = 0.0, s_sup = 0.0;
  for (std::size_t p = 0; p < P; ++p) {
    double sup = 0.0;
    for (std::size_t i = 0; i <= Nc; ++i) {
      double e = 0.0;
      for (std::size_t c = 0; c < w; ++c) {
        const double diff = xf(2 * i, p, c) - xc(i, p, c);
        e += diff * diff;
      }
      sup = std::max(sup, e);
      if (i == Nc) s_term += e;
    }
    s_sup += sup;
  }
  return {std::sqrt(s_term / static_cast<double>(P)), std::sqrt(s_sup / static_cast<double>(P))};
}

}  // namespace rmp
