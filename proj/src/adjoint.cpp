#include "rmp/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rmp {

PathField y_sensitivity(const ScenarioSpec& spec, const StateSolution& base) {
  const auto& c = spec.coef();
  const auto& ens = base.forward;
  const auto& bs = base.backward;
  const std::size_t N = ens.n_nodes() - 1, P = ens.n_paths();
  PathField out(N, P, 1);
  for (std::size_t s = 0; s < N; ++s) {
    const double t = ens.grid.time(s);
    const auto m = ens.mean_at(s);
    for (std::size_t p = 0; p < P; ++p) {
      const Point at{t, ens.x.row(s, p), m, bs.y(s, p), bs.z.row(s, p), ens.control_at(s, p)};
      out(s, p) = c.generator_dy(ens.theta, at);
    }
  }
  return out;
}

namespace {

double initial_adjoint(const ScenarioSpec& spec, const StateSolution& base) {
  return -spec.coef().initial_cost_dy(base.theta(), base.backward.y0());
}

}  // namespace

PathField solve_adjoint_p(const ScenarioSpec& spec, const StateSolution& base,
                          const BrownianEnsemble& noise) {
  const double p0 = initial_adjoint(spec, base);
  const std::size_t N = noise.grid().n_steps, P = noise.n_paths();
  PathField out(N + 1, P, 1);
  if (p0 == 0.0) return out;
  const double dt = noise.grid().dt();
  const PathField fy = y_sensitivity(spec, base);
  const PathField logd = doleans_dade_log(z_sensitivity(spec, base), noise);
  const double lp0 = std::log(std::abs(p0)), sign = p0 > 0.0 ? 1.0 : -1.0;
  for (std::size_t p = 0; p < P; ++p) {
    double drift = 0.0;
    for (std::size_t i = 0; i <= N; ++i) {
      const double lg = lp0 + drift + logd(i, p);
      if (!(lg < 700.0)) throw NumericError("adjoint p overflows on path " + std::to_string(p));
      out(i, p) = sign * std::exp(lg);
      if (i < N) drift += fy(i, p) * dt;
    }
  }
  return out;
}

PathField solve_adjoint_p_euler(const ScenarioSpec& spec, const StateSolution& base,
                                const BrownianEnsemble& noise) {
  return solve_linear_unbounded_sde(y_sensitivity(spec, base), PathField{},
                                    z_sensitivity(spec, base), PathField{},
                                    initial_adjoint(spec, base), noise, spec.solver.blowup_cap);
}

AdjointTriple solve_adjoint_qr(const ScenarioSpec& spec, const StateSolution& base, PathField p,
                               const BrownianEnsemble& noise) {
  const auto& c = spec.coef();
  const auto& ens = base.forward;
  const auto& bs = base.backward;
  const std::size_t n = c.state_dim(), d = c.noise_dim();
  const std::size_t N = noise.grid().n_steps, P = noise.n_paths();
  const double th = ens.theta;
  if (p.nodes() != N + 1 || p.paths() != P) throw ConfigError("adjoint p has the wrong shape");

  LinearBsde pr;
  pr.width = n;
  pr.y_coef = PathField(N, P, n * n);
  pr.z_coef = PathField(N, P, n * n * d);
  pr.inhomogeneity = PathField(N, P, n);
  pr.mean_y_coef = PathField(N, P, n * n);
  pr.mean_inhomogeneity = PathField(N, P, n);
  std::vector<double> bx(n * n), bxm(n * n), sx(d * n * n), fx(n), fxm(n);
  for (std::size_t s = 0; s < N; ++s) {
    const double t = noise.grid().time(s);
    const auto m = ens.mean_at(s);
    for (std::size_t path = 0; path < P; ++path) {
      const auto xb = ens.x.row(s, path);
      const auto v = ens.control_at(s, path);
      const Point at{t, xb, m, bs.y(s, path), bs.z.row(s, path), v};
      c.drift_dx(th, at, bx);
      c.drift_dxm(th, at, bxm);
      c.diffusion_dx(th, t, xb, v, sx);
      c.generator_dx(th, at, fx);
      c.generator_dxm(th, at, fxm);
      const double pv = p(s, path);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          pr.y_coef(s, path, i * n + j) = bx[j * n + i];
          pr.mean_y_coef(s, path, i * n + j) = bxm[j * n + i];
          for (std::size_t cc = 0; cc < d; ++cc)
            pr.z_coef(s, path, (i * n + j) * d + cc) = sx[(cc * n + j) * n + i];
        }
        pr.inhomogeneity(s, path, i) = -fx[i] * pv;
        pr.mean_inhomogeneity(s, path, i) = -fxm[i] * pv;
      }
    }
  }

  const auto mT = ens.mean_at(N);
  std::vector<double> px(n), pxm(n), phix(n), coupling(n, 0.0);
  for (std::size_t path = 0; path < P; ++path) {
    c.terminal_dxm(th, ens.x.row(N, path), mT, pxm);
    for (std::size_t i = 0; i < n; ++i) coupling[i] += pxm[i] * p(N, path);
  }
  for (double& e : coupling) e /= static_cast<double>(P);
  pr.terminal.resize(P * n);
  for (std::size_t path = 0; path < P; ++path) {
    const auto xb = ens.x.row(N, path);
    c.terminal_dx(th, xb, mT, px);
    c.terminal_cost_dx(th, xb, phix);
    for (std::size_t i = 0; i < n; ++i)
      pr.terminal[path * n + i] = -px[i] * p(N, path) - coupling[i] + phix[i];
  }

  BackwardOptions opts = linear_options(spec);
  opts.keep_conditional = true;
  RegressionState state{&ens.x, &p};
  BackwardSolution sol = solve_meanfield_linear_bsde(pr, state, noise, opts);
  for (std::size_t path = 0; path < P; ++path)
    for (std::size_t i = 0; i < n; ++i)
      if (sol.y(N, path, i) != pr.terminal[path * n + i])
        throw SolverError("adjoint terminal condition not reproduced");

  AdjointTriple out;
  out.theta = th;
  out.p = std::move(p);
  out.q = std::move(sol.y);
  out.r = std::move(sol.z);
  out.q_ahead = std::move(sol.conditional);
  return out;
}

AdjointTriple solve_adjoint(const ScenarioSpec& spec, const StateSolution& base,
                            const BrownianEnsemble& noise) {
  return solve_adjoint_qr(spec, base, solve_adjoint_p(spec, base, noise), noise);
}

double hamiltonian(const ScenarioSpec& spec, double theta, const Point& at, double p,
                   std::span<const double> q, std::span<const double> r) {
  const auto& c = spec.coef();
  const std::size_t n = c.state_dim(), d = c.noise_dim();
  if (q.size() != n || r.size() != n * d) throw ConfigError("hamiltonian: adjoint sizes differ");
  std::vector<double> b(n), sig(n * d);
  c.drift(theta, at, b);
  c.diffusion(theta, at.t, at.x, at.v, sig);
  double h = 0.0;
  for (std::size_t i = 0; i < n; ++i) h += q[i] * b[i];
  for (std::size_t i = 0; i < n * d; ++i) h += r[i] * sig[i];
  if (p != 0.0) h -= p * c.generator(theta, at);
  return h;
}

void hamiltonian_dv(const ScenarioSpec& spec, double theta, const Point& at, double p,
                    std::span<const double> q, std::span<const double> r, std::span<double> out) {
  const auto& c = spec.coef();
  const std::size_t n = c.state_dim(), d = c.noise_dim(), k = c.control_dim();
  if (q.size() != n || r.size() != n * d || out.size() != k)
    throw ConfigError("hamiltonian_dv: sizes differ");
  std::vector<double> bv(n * k), sv(d * n * k), fv(k);
  c.drift_dv(theta, at, bv);
  c.diffusion_dv(theta, at.t, at.x, at.v, sv);
  c.generator_dv(theta, at, fv);
  for (std::size_t j = 0; j < k; ++j) {
    double g = -p * fv[j];
    for (std::size_t i = 0; i < n; ++i) {
      g += bv[i * k + j] * q[i];
      for (std::size_t cc = 0; cc < d; ++cc) g += sv[(cc * n + i) * k + j] * r[i * d + cc];
    }
    out[j] = g;
  }
}

PathField lambda_gradient(const ScenarioSpec& spec, const StateSolution& base,
                          const AdjointTriple& adjoint) {
  const auto& c = spec.coef();
  const auto& ens = base.forward;
  const auto& bs = base.backward;
  const std::size_t k = c.control_dim();
  const std::size_t N = ens.n_nodes() - 1, P = ens.n_paths();
  const double dt = ens.grid.dt(), th = ens.theta;
  PathField out(N, P, k);
  for (std::size_t s = 0; s < N; ++s) {
    const double t = ens.grid.time(s);
    const auto m = ens.mean_at(s);
    for (std::size_t path = 0; path < P; ++path) {
      const Point at{t, ens.x.row(s, path), m, bs.y(s, path), bs.z.row(s, path),
                     ens.control_at(s, path)};
      const double pt = adjoint.p(s, path) * std::exp(c.generator_dy(th, at) * dt);
      const auto q = adjoint.q_ahead.empty() ? adjoint.q.row(s, path) : adjoint.q_ahead.row(s, path);
      hamiltonian_dv(spec, th, at, pt, q, adjoint.r.row(s, path), out.row(s, path));
    }
  }
  return out;
}

GradientMean gradient_mean(const PathField& lambda) {
  const std::size_t N = lambda.nodes(), P = lambda.paths(), k = lambda.width();
  GradientMean g;
  g.mean.resize(N * k);
  g.se.resize(N * k);
  std::vector<double> xs(P);
  for (std::size_t s = 0; s < N; ++s)
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t p = 0; p < P; ++p) xs[p] = lambda(s, p, j);
      const MeanAndError me = sample_mean(xs);
      g.mean[s * k + j] = me.mean;
      g.se[s * k + j] = me.se;
    }
  return g;
}

DualityResult duality_check(const ScenarioSpec& spec, const StateSolution& base,
                            const AdjointTriple& adjoint, const ControlProcess& v,
                            const BrownianEnsemble& noise) {
  const auto& c = spec.coef();
  const std::size_t n = c.state_dim(), k = c.control_dim();
  const std::size_t N = noise.grid().n_steps, P = noise.n_paths();
  const double dt = noise.grid().dt(), th = base.theta();
  const VariationalSolution var = solve_variational(spec, base, v, noise);
  const PathField lam = lambda_gradient(spec, base, adjoint);
  const double gy = c.initial_cost_dy(th, base.backward.y0());
  const ControlProcess& vbar = base.forward.control;

  const std::vector<double> y1 = var.yz.y0_samples();
  std::vector<double> lhs(P), rhs(P, 0.0), phix(n);
  for (std::size_t p = 0; p < P; ++p) {
    c.terminal_cost_dx(th, base.forward.x.row(N, p), phix);
    double val = gy * y1[p];
    for (std::size_t i = 0; i < n; ++i) val += phix[i] * var.x1(N, p, i);
    lhs[p] = val;
  }
  for (std::size_t s = 0; s < N; ++s) {
    const auto vb = vbar.at(s), vv = v.at(s);
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t j = 0; j < k; ++j) rhs[p] += lam(s, p, j) * (vv[j] - vb[j]) * dt;
  }
  const MeanAndError l = sample_mean(lhs), r = sample_mean(rhs);
  DualityResult out;
  out.lhs = l.mean;
  out.rhs = r.mean;
  out.lhs_se = l.se;
  out.rhs_se = r.se;
  out.gap = std::abs(l.mean - r.mean) / (std::abs(l.mean) + std::abs(r.mean) + 1e-12);
  return out;
}

DualityResult duality_check(const ScenarioSpec& spec, double theta, const ControlProcess& vbar,
                            const ControlProcess& v, const BrownianEnsemble& noise) {
  const StateSolution base = solve_state(spec, theta, vbar, noise);
  const AdjointTriple adj = solve_adjoint(spec, base, noise);
  return duality_check(spec, base, adj, v, noise);
}

namespace {

double sup_gap(const PathField& a, const PathField& b, double e) {
  const std::size_t nodes = std::min(a.nodes(), b.nodes()), P = a.paths(), w = a.width();
  double total = 0.0;
  for (std::size_t p = 0; p < P; ++p) {
    double sup = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
      double s = 0.0;
      for (std::size_t c = 0; c < w; ++c) {
        const double diff = a(i, p, c) - b(i, p, c);
        s += diff * diff;
      }
      sup = std::max(sup, s);
    }
    total += std::pow(sup, 0.5 * e);
  }
  return total / static_cast<double>(P);
}

double integral_gap(const PathField& a, const PathField& b, double e, double dt) {
  const std::size_t N = a.nodes() - 1, P = a.paths(), w = a.width();
  double total = 0.0;
  for (std::size_t p = 0; p < P; ++p) {
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t c = 0; c < w; ++c) {
        const double diff = a(i, p, c) - b(i, p, c);
        s += diff * diff * dt;
      }
    total += std::pow(s, 0.5 * e);
  }
  return total / static_cast<double>(P);
}

}  // namespace

ThetaGaps theta_continuity_probe(const ScenarioSpec& spec, double theta_a, double theta_b,
                                 const ControlProcess& vbar, const ControlProcess& v,
                                 double exponent, const BrownianEnsemble& noise) {
  const StateSolution ba = solve_state(spec, theta_a, vbar, noise);
  const StateSolution bb = solve_state(spec, theta_b, vbar, noise);
  ThetaGaps g;
  for (const StateSolution* b : {&ba, &bb}) {
    const PathField zs = z_sensitivity(spec, *b);
    g.p_m = std::min(g.p_m, estimate_bmo_norm(zs, b->forward.x, noise.grid(), spec.basis).p_m);
  }
  const auto [low, high] = exponent_band(g.p_m);
  if (!(exponent > low && exponent < high))
    throw DomainError("exponent " + std::to_string(exponent) + " outside the admissible band (" +
                      std::to_string(low) + ", " + std::to_string(high) +
                      ") for estimated p_M = " + std::to_string(g.p_m) + " of f_z . W");
  g.x = sup_gap(ba.forward.x, bb.forward.x, exponent);
  g.y = sup_gap(ba.backward.y, bb.backward.y, exponent);
  {
    const VariationalSolution va = solve_variational(spec, ba, v, noise);
    const VariationalSolution vb = solve_variational(spec, bb, v, noise);
    g.x1 = sup_gap(va.x1, vb.x1, exponent);
    g.y1 = sup_gap(va.yz.y, vb.yz.y, exponent);
  }
  const AdjointTriple aa = solve_adjoint(spec, ba, noise);
  const AdjointTriple ab = solve_adjoint(spec, bb, noise);
  g.p = sup_gap(aa.p, ab.p, exponent);
  g.q = sup_gap(aa.q, ab.q, exponent);
  g.r = integral_gap(aa.r, ab.r, exponent, noise.grid().dt());
  return g;
}

}  // namespace rmp
