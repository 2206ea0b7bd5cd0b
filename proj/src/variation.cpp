#include "rmp/variation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rmp {

StateSolution solve_state(const ScenarioSpec& spec, double theta, const ControlProcess& control,
                          const BrownianEnsemble& noise) {
  StateSolution s;
  s.forward = solve_forward(spec, theta, control, noise);
  s.backward = solve_bsde(spec, s.forward, noise);
  return s;
}

BackwardOptions linear_options(const ScenarioSpec& spec) {
  BackwardOptions o = backward_options(spec);
  o.y_cap.reset();
  return o;
}

namespace {

void require_deterministic(const ControlProcess& a, const ControlProcess& b) {
  if (a.is_feedback() || b.is_feedback())
    throw DomainError("variational and adjoint solvers need deterministic controls");
  if (a.n_steps() != b.n_steps() || a.dim() != b.dim()) throw ConfigError("control shapes differ");
}

}  // namespace

PathField solve_variational_sde(const ScenarioSpec& spec, const StateSolution& base,
                                const ControlProcess& v, const BrownianEnsemble& noise) {
  const auto& c = spec.coef();
  const auto& ens = base.forward;
  const ControlProcess& vbar = ens.control;
  require_deterministic(vbar, v);
  const std::size_t n = c.state_dim(), d = c.noise_dim(), k = c.control_dim();
  const std::size_t N = noise.grid().n_steps, P = noise.n_paths();
  const double dt = noise.grid().dt(), th = ens.theta;
  PathField x1(N + 1, P, n);
  std::vector<double> bx(n * n), bxm(n * n), bv(n * k), sx(d * n * n), sv(d * n * k), dv(k), m1(n),
      nxt(n);
  for (std::size_t s = 0; s < N; ++s) {
    const double t = noise.grid().time(s);
    const auto vb = vbar.at(s), vv = v.at(s);
    for (std::size_t j = 0; j < k; ++j) dv[j] = vv[j] - vb[j];
    for (std::size_t i = 0; i < n; ++i) m1[i] = x1.mean(s, i);
    const auto m = ens.mean_at(s);
    for (std::size_t p = 0; p < P; ++p) {
      const auto xb = ens.x.row(s, p);
      const Point at{t, xb, m, 0.0, {}, vb};
      c.drift_dx(th, at, bx);
      c.drift_dxm(th, at, bxm);
      c.drift_dv(th, at, bv);
      c.diffusion_dx(th, t, xb, vb, sx);
      c.diffusion_dv(th, t, xb, vb, sv);
      const auto cur = x1.row(s, p);
      for (std::size_t i = 0; i < n; ++i) {
        double drift = 0.0;
        for (std::size_t j = 0; j < n; ++j) drift += bx[i * n + j] * cur[j] + bxm[i * n + j] * m1[j];
        for (std::size_t j = 0; j < k; ++j) drift += bv[i * k + j] * dv[j];
        double val = cur[i] + drift * dt;
        for (std::size_t cc = 0; cc < d; ++cc) {
          double vol = 0.0;
          for (std::size_t j = 0; j < n; ++j) vol += sx[(cc * n + i) * n + j] * cur[j];
          for (std::size_t j = 0; j < k; ++j) vol += sv[(cc * n + i) * k + j] * dv[j];
          val += vol * noise.increment(s, p, cc);
        }
        if (!std::isfinite(val) || std::abs(val) > spec.solver.blowup_cap)
          throw DivergedError("variational state diverged on path " + std::to_string(p) +
                              " at step " + std::to_string(s));
        nxt[i] = val;
      }
      auto dst = x1.row(s + 1, p);
      std::copy(nxt.begin(), nxt.end(), dst.begin());
    }
  }
  return x1;
}

BackwardSolution solve_variational_bsde(const ScenarioSpec& spec, const StateSolution& base,
                                        const PathField& x1, const ControlProcess& v,
                                        const BrownianEnsemble& noise) {
  const auto& c = spec.coef();
  const auto& ens = base.forward;
  const auto& bs = base.backward;
  const ControlProcess& vbar = ens.control;
  require_deterministic(vbar, v);
  const std::size_t n = c.state_dim(), d = c.noise_dim(), k = c.control_dim();
  const std::size_t N = noise.grid().n_steps, P = noise.n_paths();
  const double th = ens.theta;

  LinearBsde pr;
  pr.width = 1;
  pr.y_coef = PathField(N, P, 1);
  pr.z_coef = PathField(N, P, d);
  pr.inhomogeneity = PathField(N, P, 1);
  std::vector<double> fx(n), fxm(n), fz(d), fv(k), m1(n);
  for (std::size_t s = 0; s < N; ++s) {
    const double t = noise.grid().time(s);
    const auto vb = vbar.at(s), vv = v.at(s);
    for (std::size_t i = 0; i < n; ++i) m1[i] = x1.mean(s, i);
    const auto m = ens.mean_at(s);
    for (std::size_t p = 0; p < P; ++p) {
      const Point at{t, ens.x.row(s, p), m, bs.y(s, p), bs.z.row(s, p), vb};
      c.generator_dx(th, at, fx);
      c.generator_dxm(th, at, fxm);
      c.generator_dz(th, at, fz);
      c.generator_dv(th, at, fv);
      pr.y_coef(s, p) = c.generator_dy(th, at);
      for (std::size_t j = 0; j < d; ++j) pr.z_coef(s, p, j) = fz[j];
      double g = 0.0;
      const auto xr = x1.row(s, p);
      for (std::size_t i = 0; i < n; ++i) g += fx[i] * xr[i] + fxm[i] * m1[i];
      for (std::size_t j = 0; j < k; ++j) g += fv[j] * (vv[j] - vb[j]);
      pr.inhomogeneity(s, p) = g;
    }
  }
  pr.terminal.resize(P);
  std::vector<double> px(n), pxm(n);
  for (std::size_t i = 0; i < n; ++i) m1[i] = x1.mean(N, i);
  const auto mT = ens.mean_at(N);
  for (std::size_t p = 0; p < P; ++p) {
    const auto xb = ens.x.row(N, p);
    c.terminal_dx(th, xb, mT, px);
    c.terminal_dxm(th, xb, mT, pxm);
    double val = 0.0;
    const auto xr = x1.row(N, p);
    for (std::size_t i = 0; i < n; ++i) val += px[i] * xr[i] + pxm[i] * m1[i];
    pr.terminal[p] = val;
  }
  RegressionState state{&ens.x, &x1};
  return solve_linear_bsde(pr, state, noise, linear_options(spec));
}

VariationalSolution solve_variational(const ScenarioSpec& spec, const StateSolution& base,
                                      const ControlProcess& v, const BrownianEnsemble& noise) {
  VariationalSolution out;
  out.x1 = solve_variational_sde(spec, base, v, noise);
  out.yz = solve_variational_bsde(spec, base, out.x1, v, noise);
  return out;
}

PathField z_sensitivity(const ScenarioSpec& spec, const StateSolution& base) {
  const auto& c = spec.coef();
  const auto& ens = base.forward;
  const auto& bs = base.backward;
  const std::size_t d = c.noise_dim(), N = ens.n_nodes() - 1, P = ens.n_paths();
  const TimeGrid& grid = ens.grid;
  PathField out(N, P, d);
  for (std::size_t s = 0; s < N; ++s) {
    const double t = grid.time(s);
    const auto m = ens.mean_at(s);
    for (std::size_t p = 0; p < P; ++p) {
      const Point at{t, ens.x.row(s, p), m, bs.y(s, p), bs.z.row(s, p), ens.control_at(s, p)};
      c.generator_dz(ens.theta, at, out.row(s, p));
    }
  }
  return out;
}

DeltaProcesses delta_processes(const ScenarioSpec& spec, const StateSolution& base,
                               const VariationalSolution& var, const ControlProcess& v,
                               double lambda, const BrownianEnsemble& noise) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  const ControlProcess vl = base.forward.control.toward(v, lambda);
  const StateSolution pert = solve_state(spec, base.theta(), vl, noise);
  DeltaProcesses out;
  out.lambda = lambda;
  auto diff = [lambda](const PathField& a, const PathField& b, const PathField& first) {
    PathField r(a.nodes(), a.paths(), a.width());
    for (std::size_t i = 0; i < r.data().size(); ++i)
      r.data()[i] = (a.data()[i] - b.data()[i]) / lambda - first.data()[i];
    return r;
  };
  out.dx = diff(pert.forward.x, base.forward.x, var.x1);
  out.dy = diff(pert.backward.y, base.backward.y, var.yz.y);
  out.dz = diff(pert.backward.z, base.backward.z, var.yz.z);
  return out;
}

DeltaNorms delta_norms(const DeltaProcesses& delta, const PathField& weight, double p,
                       const TimeGrid& grid) {
  const std::size_t N = grid.n_steps, P = delta.dx.paths();
  const double dt = grid.dt();
  auto norm = [](std::span<const double> r) {
    double s = 0.0;
    for (double e : r) s += e * e;
    return std::sqrt(s);
  };
  DeltaNorms out;
  for (std::size_t path = 0; path < P; ++path) {
    double sx = 0.0, sy = 0.0, iz = 0.0;
    for (std::size_t i = 0; i <= N; ++i) {
      const double g = weight.empty() ? 1.0 : weight(i, path);
      sx = std::max(sx, std::pow(norm(delta.dx.row(i, path)), p));
      sy = std::max(sy, g * std::pow(std::abs(delta.dy(i, path)), p));
      if (i < N) {
        const double gz = weight.empty() ? 1.0 : std::pow(g, 2.0 / p);
        const double zn = norm(delta.dz.row(i, path));
        iz += gz * zn * zn * dt;
      }
    }
    out.x += sx;
    out.y += sy;
    out.z += std::pow(iz, 0.5 * p);
  }
  out.x /= static_cast<double>(P);
  out.y /= static_cast<double>(P);
  out.z /= static_cast<double>(P);
  return out;
}

std::pair<double, double> exponent_band(double p_m) {
  const double low = std::isinf(p_m) ? 1.0 : std::max(1.0, 2.0 * 1.1 / p_m);
  return {low, 2.0};
}

double loglog_slope(const std::vector<double>& lambdas, const std::vector<double>& values) {
  const std::size_t n = std::min(lambdas.size(), values.size());
  if (n < 2) return NAN;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(values[i] > 0.0) || !(lambdas[i] > 0.0)) return NAN;
    const double x = std::log(lambdas[i]), y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

DeltaDiagnostics convergence_sweep(const ScenarioSpec& spec, const std::vector<double>& thetas,
                                   const ControlProcess& vbar, const ControlProcess& v,
                                   const std::vector<double>& lambdas, double p,
                                   const BrownianEnsemble& noise) {
  if (lambdas.empty()) throw ConfigError("lambda list is empty");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0)) throw DomainError("lambda values must be positive");
    if (i > 0 && !(lambdas[i] < lambdas[i - 1]))
      throw DomainError("lambda list must be strictly decreasing");
  }
  DeltaDiagnostics out;
  out.lambdas = lambdas;
  out.p = p;
  out.norms.assign(lambdas.size(), DeltaNorms{});
  for (double th : thetas) {
    StateSolution base = solve_state(spec, th, vbar, noise);
    const PathField zs = z_sensitivity(spec, base);
    const BmoEstimate bmo = estimate_bmo_norm(zs, base.forward.x, noise.grid(), spec.basis);
    out.p_m = std::min(out.p_m, bmo.p_m);
    std::tie(out.band_low, out.band_high) = exponent_band(out.p_m);
    if (!(p > out.band_low && p < out.band_high))
      throw DomainError("exponent " + std::to_string(p) + " outside the admissible band (" +
                        std::to_string(out.band_low) + ", " + std::to_string(out.band_high) +
                        ") for estimated p_M = " + std::to_string(out.p_m) + " of f_z . W");
    const PathField weight = doleans_dade(zs, noise);
    const VariationalSolution var = solve_variational(spec, base, v, noise);
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      const DeltaProcesses dp = delta_processes(spec, base, var, v, lambdas[i], noise);
      const DeltaNorms nm = delta_norms(dp, weight, p, noise.grid());
      out.norms[i].x = std::max(out.norms[i].x, nm.x);
      out.norms[i].y = std::max(out.norms[i].y, nm.y);
      out.norms[i].z = std::max(out.norms[i].z, nm.z);
    }
  }
  std::vector<double> xs, ys, zs;
  for (const auto& nm : out.norms) {
    xs.push_back(nm.x);
    ys.push_back(nm.y);
    zs.push_back(nm.z);
  }
  out.slope_x = loglog_slope(lambdas, xs);
  out.slope_y = loglog_slope(lambdas, ys);
  out.slope_z = loglog_slope(lambdas, zs);
  return out;
}

}  // namespace rmp
