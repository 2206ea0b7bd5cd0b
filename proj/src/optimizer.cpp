#include "rmp/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "rmp/simplex.hpp"

namespace rmp {

std::vector<GradientMean> robust_gradients(const ScenarioSpec& spec, const RobustState& base,
                                           const BrownianEnsemble& noise) {
  std::vector<GradientMean> out;
  out.reserve(base.states.size());
  for (const StateSolution& st : base.states) {
    const AdjointTriple adj = solve_adjoint(spec, st, noise);
    out.push_back(gradient_mean(lambda_gradient(spec, st, adj)));
  }
  return out;
}

namespace {

// Candidate points of V: corners, or a tensor grid.
std::vector<double> candidate_points(const ControlSpace& cs, std::size_t per_axis) {
  return per_axis == 0 ? cs.corners() : cs.grid(per_axis);
}

std::vector<double> combine(const std::vector<GradientMean>& grads, const std::vector<double>& w,
                            bool se) {
  std::vector<double> out(grads.at(0).mean.size(), 0.0);
  for (std::size_t th = 0; th < grads.size(); ++th)
    if (w[th] != 0.0) {
      const auto& src = se ? grads[th].se : grads[th].mean;
      const double wt = se ? std::abs(w[th]) : w[th];
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += wt * src[i];
    }
  return out;
}

void check_gradients(const ScenarioSpec& spec, const ControlProcess& vbar,
                     const std::vector<GradientMean>& grads) {
  if (vbar.is_feedback()) throw DomainError("the residual needs a deterministic control");
  if (grads.size() != spec.theta.size()) throw ConfigError("one gradient per parameter point is required");
  for (const auto& g : grads)
    if (g.mean.size() != vbar.n_steps() * vbar.dim())
      throw ConfigError("gradient does not match the control grid");
}

}  // namespace

MpResidualReport mp_residual(const ScenarioSpec& spec, const ControlProcess& vbar,
                             const std::vector<GradientMean>& gradients,
                             const std::vector<double>& q_bar, std::size_t per_axis) {
  check_gradients(spec, vbar, gradients);
  if (q_bar.size() != spec.theta.size()) throw ConfigError("multiplier has the wrong size");
  const std::size_t N = vbar.n_steps(), k = vbar.dim();
  const std::vector<double> pts = candidate_points(spec.controls, per_axis);
  const std::size_t n_pts = pts.size() / k;
  MpResidualReport rep;
  rep.q_bar = q_bar;
  rep.direction = combine(gradients, q_bar, false);
  const std::vector<double> dse = combine(gradients, q_bar, true);
  rep.residual.assign(N, 0.0);
  rep.step_se.assign(N, 0.0);
  double pooled = 0.0;
  for (std::size_t s = 0; s < N; ++s) {
    const auto vb = vbar.at(s);
    double best = 0.0, best_se = 0.0;  // u = vbar(t_i) gives 0
    for (std::size_t u = 0; u < n_pts; ++u) {
      double val = 0.0, se = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const double du = pts[u * k + j] - vb[j];
        val += rep.direction[s * k + j] * du;
        se += dse[s * k + j] * std::abs(du);
      }
      if (val < best) {
        best = val;
        best_se = se;
      }
    }
    rep.residual[s] = best;
    rep.step_se[s] = best_se;
    pooled += best_se * best_se;
  }
  rep.tol = spec.solver.tol_mult * std::sqrt(pooled / static_cast<double>(std::max<std::size_t>(N, 1)));
  rep.min_residual = 0.0;
  for (std::size_t s = 0; s < N; ++s) {
    if (rep.residual[s] < rep.min_residual) {
      rep.min_residual = rep.residual[s];
      rep.worst_step = s;
    }
    if (rep.residual[s] < -rep.tol) rep.flagged.push_back(s);
  }
  rep.certified = rep.min_residual >= -rep.tol;
  return rep;
}

MpResidualReport mp_residual(const ScenarioSpec& spec, const ControlProcess& vbar,
                             const std::vector<GradientMean>& gradients,
                             const std::vector<std::size_t>& vertices) {
  check_gradients(spec, vbar, gradients);
  if (vertices.empty()) throw ConfigError("no vertices for the multiplier");
  const std::size_t N = vbar.n_steps(), k = vbar.dim(), T = spec.theta.size();
  const std::size_t A = vertices.size();
  const std::vector<double> pts = candidate_points(spec.controls, 0);
  const std::size_t n_pts = pts.size() / k, cols = N * n_pts;
  std::vector<double> payoff(A * cols, 0.0);
  for (std::size_t a = 0; a < A; ++a) {
    const std::vector<double> g = combine(gradients, spec.polytope.vertex(vertices[a]), false);
    for (std::size_t s = 0; s < N; ++s)
      for (std::size_t u = 0; u < n_pts; ++u) {
        double val = 0.0;
        for (std::size_t j = 0; j < k; ++j) val += g[s * k + j] * (pts[u * k + j] - vbar.at(s)[j]);
        payoff[a * cols + s * n_pts + u] = val;
      }
  }
  std::vector<double> q(T, 0.0);
  if (A == 1) {
    q = spec.polytope.vertex(vertices[0]);
  } else {
    const GameSolution game = solve_matrix_game(payoff, A, cols);
    for (std::size_t a = 0; a < A; ++a)
      for (std::size_t th = 0; th < T; ++th) q[th] += game.weights[a] * spec.polytope.vertex(vertices[a])[th];
  }
  return mp_residual(spec, vbar, gradients, q);
}

MpResidualReport mp_residual(const ScenarioSpec& spec, const ControlProcess& vbar,
                             const BrownianEnsemble& noise, const std::vector<double>& q_bar) {
  const RobustState st = evaluate_states(spec, vbar, noise);
  const std::vector<GradientMean> grads = robust_gradients(spec, st, noise);
  if (q_bar.empty()) return mp_residual(spec, vbar, grads, st.eval.active);
  return mp_residual(spec, vbar, grads, q_bar);
}

namespace {

struct DualStep {
  std::vector<double> weights;  // over vertices
  std::vector<double> delta;    // [step * k + j]
  double model = 0.0;           // max_j (J_j + <G_j, delta>)
};

// Maximizes the concave dual of the linearized min-max step over the simplex.
DualStep solve_dual(const std::vector<std::vector<double>>& g, const std::vector<double>& values,
                    const ControlProcess& v, const ControlSpace& cs, double eta, double dt,
                    std::size_t iters, std::size_t start) {
  const std::size_t J = g.size(), L = g[0].size(), k = v.dim(), N = v.n_steps();
  auto delta_of = [&](const std::vector<double>& w) {
    std::vector<double> d(L, 0.0), u(k);
    for (std::size_t s = 0; s < N; ++s) {
      for (std::size_t j = 0; j < k; ++j) {
        double gw = 0.0;
        for (std::size_t a = 0; a < J; ++a) gw += w[a] * g[a][s * k + j];
        u[j] = v.at(s)[j] - eta * gw;
      }
      cs.project(u);
      for (std::size_t j = 0; j < k; ++j) d[s * k + j] = u[j] - v.at(s)[j];
    }
    return d;
  };
  auto pair = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < L; ++i) s += a[i] * b[i];
    return s * dt;
  };
  double lip = 0.0;
  for (std::size_t a = 0; a < J; ++a)
    for (std::size_t b = a + 1; b < J; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < L; ++i) s += (g[a][i] - g[b][i]) * (g[a][i] - g[b][i]);
      lip = std::max(lip, eta * s * dt);
    }
  std::vector<double> w(J, 0.0);
  w[start] = 1.0;
  if (J > 1 && lip > 0.0) {
    const double step = 1.0 / lip;
    std::vector<double> grad(J);
    for (std::size_t it = 0; it < iters; ++it) {
      const std::vector<double> d = delta_of(w);
      for (std::size_t a = 0; a < J; ++a) grad[a] = w[a] + step * (values[a] + pair(g[a], d));
      w = project_to_simplex(grad);
    }
  }
  DualStep out;
  out.weights = w;
  out.delta = delta_of(w);
  out.model = -INFINITY;
  for (std::size_t a = 0; a < J; ++a) out.model = std::max(out.model, values[a] + pair(g[a], out.delta));
  return out;
}

}  // namespace

OptimizationTrace robust_descent(const ScenarioSpec& spec, const ControlProcess& v0,
                                 const BrownianEnsemble& noise, const DescentOptions& opt) {
  if (v0.is_feedback()) throw DomainError("the optimizer works on deterministic controls");
  const std::size_t N = v0.n_steps(), k = v0.dim(), nv = spec.polytope.size();
  for (std::size_t s = 0; s < N; ++s)
    if (!spec.controls.contains(v0.at(s), 1e-12))
      throw DomainError("initial control leaves the control set at step " + std::to_string(s));
  const double dt = noise.grid().dt();
  OptimizationTrace tr;
  ControlProcess v = v0;
  RobustState st = evaluate_states(spec, v, noise);
  auto record = [&](const ControlProcess& c, const RobustState& s, double step) {
    tr.iterates.push_back(c);
    tr.values.push_back(s.eval.value);
    tr.value_se.push_back(s.eval.value_se);
    tr.steps.push_back(step);
    tr.worst_vertex.push_back(s.eval.argmax);
  };
  record(v, st, 0.0);
  double eta = opt.step;
  for (std::size_t iter = 0;; ++iter) {
    const std::vector<GradientMean> grads = robust_gradients(spec, st, noise);
    tr.residual = mp_residual(spec, v, grads, st.eval.active);
    if (tr.residual.certified) {
      tr.certified = true;
      tr.stop_reason = "maximum principle residual within tolerance";
      break;
    }
    if (spec.controls.is_singleton()) {
      tr.stop_reason = "control set is a single point";
      break;
    }
    if (iter >= opt.max_iters) {
      tr.stop_reason = "iteration limit";
      break;
    }
    std::vector<std::vector<double>> g(nv);
    for (std::size_t j = 0; j < nv; ++j) g[j] = combine(grads, spec.polytope.vertex(j), false);
    bool accepted = false;
    while (eta >= opt.min_step) {
      const DualStep ds = solve_dual(g, st.eval.vertex_values, v, spec.controls, eta, dt,
                                     opt.dual_iters, st.eval.argmax);
      const double pred = st.eval.value - ds.model;
      if (!(pred > 0.0)) {
        eta *= 0.5;
        ++tr.rejected;
        continue;
      }
      ControlProcess cand = v;
      for (std::size_t s = 0; s < N; ++s)
        for (std::size_t j = 0; j < k; ++j) cand.at(s)[j] += ds.delta[s * k + j];
      for (std::size_t s = 0; s < N; ++s) spec.controls.project(cand.at(s));
      RobustState next = evaluate_states(spec, cand, noise);
      if (next.eval.value <= st.eval.value - opt.armijo * pred) {
        tr.weights.push_back(ds.weights);
        v = std::move(cand);
        st = std::move(next);
        record(v, st, eta);
        eta = std::min(2.0 * eta, opt.max_step);
        accepted = true;
        break;
      }
      ++tr.rejected;
      eta *= 0.5;
    }
    if (!accepted) {
      tr.stalled = true;
      tr.stop_reason = "no acceptable step above the minimum step size";
      break;
    }
  }
  return tr;
}

namespace {

std::string describe(const std::string& label, std::span<const double> a, std::span<const double> b) {
  std::ostringstream os;
  os.precision(6);
  os << label << " between (";
  for (std::size_t i = 0; i < a.size(); ++i) os << (i ? ", " : "") << a[i];
  os << ") and (";
  for (std::size_t i = 0; i < b.size(); ++i) os << (i ? ", " : "") << b[i];
  os << ")";
  return os.str();
}

void note(ConvexityCheck& chk, double excess, double scale, const std::string& witness) {
  const double rel = excess / scale;
  if (rel > chk.worst_excess) {
    chk.worst_excess = rel;
    chk.witness = witness;
  }
  if (excess > 1e-9 * scale) chk.passed = false;
}

}  // namespace

AuditReport sufficiency_audit(const ScenarioSpec& spec, const ControlProcess& vbar,
                              const std::vector<double>& q_bar,
                              const std::vector<ControlProcess>& probes,
                              const std::vector<double>& lambdas, const BrownianEnsemble& noise,
                              std::size_t n_midpoints, std::uint64_t seed) {
  const auto& c = spec.coef();
  const std::size_t n = c.state_dim(), d = c.noise_dim(), k = c.control_dim();
  const std::size_t T = spec.theta.size(), N = noise.grid().n_steps, P = noise.n_paths();
  const double R = spec.constants.probe_radius, horizon = noise.grid().horizon;
  AuditReport rep;
  const RobustState base = evaluate_states(spec, vbar, noise);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto box = [&](std::vector<double>& out) {
    for (double& e : out) e = R * (2.0 * unit(rng) - 1.0);
  };
  auto control = [&](std::vector<double>& out) {
    for (std::size_t j = 0; j < k; ++j)
      out[j] = spec.controls.lower()[j] + unit(rng) * (spec.controls.upper()[j] - spec.controls.lower()[j]);
  };
  auto mid = [](const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> m(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) m[i] = 0.5 * (a[i] + b[i]);
    return m;
  };

  ConvexityCheck hc{"Hamiltonian convex in (x, x', y, z, v)", true, 0.0, ""};
  ConvexityCheck pc{"phi convex in x", true, 0.0, ""};
  ConvexityCheck gc{"gamma convex in y", true, 0.0, ""};
  ConvexityCheck tc{"Phi concave in (x, x')", true, 0.0, ""};
  for (std::size_t th = 0; th < T; ++th) {
    if (!q_bar.empty() && q_bar.at(th) <= 0.0) continue;
    const double tv = spec.theta[th].coord;
    const AdjointTriple adj = solve_adjoint(spec, base.states[th], noise);
    std::vector<double> xa(n), xb(n), ma(n), mb(n), za(d), zb(d), va(k), vb(k), ya(1), yb(1);
    for (std::size_t it = 0; it < n_midpoints; ++it) {
      const std::size_t s = static_cast<std::size_t>(unit(rng) * N) % N;
      const std::size_t path = static_cast<std::size_t>(unit(rng) * P) % P;
      const double t = unit(rng) * horizon, pv = adj.p(s, path);
      const auto q = adj.q.row(s, path), r = adj.r.row(s, path);
      box(xa), box(xb), box(ma), box(mb), box(za), box(zb), box(ya), box(yb);
      control(va), control(vb);
      const auto xm = mid(xa, xb), mm = mid(ma, mb), zm = mid(za, zb), vm = mid(va, vb);
      const double ym = 0.5 * (ya[0] + yb[0]);
      const double ha = hamiltonian(spec, tv, Point{t, xa, ma, ya[0], za, va}, pv, q, r);
      const double hb = hamiltonian(spec, tv, Point{t, xb, mb, yb[0], zb, vb}, pv, q, r);
      const double hm = hamiltonian(spec, tv, Point{t, xm, mm, ym, zm, vm}, pv, q, r);
      std::vector<double> pa{xa.begin(), xa.end()}, pb{xb.begin(), xb.end()};
      pa.insert(pa.end(), ma.begin(), ma.end());
      pb.insert(pb.end(), mb.begin(), mb.end());
      pa.push_back(ya[0]);
      pb.push_back(yb[0]);
      pa.insert(pa.end(), za.begin(), za.end());
      pb.insert(pb.end(), zb.begin(), zb.end());
      pa.insert(pa.end(), va.begin(), va.end());
      pb.insert(pb.end(), vb.begin(), vb.end());
      note(hc, hm - 0.5 * (ha + hb), 1.0 + std::abs(ha) + std::abs(hb),
           describe("parameter " + spec.theta[th].label + ": H midpoint", pa, pb));

      const double fa = c.terminal_cost(tv, xa), fb = c.terminal_cost(tv, xb), fm = c.terminal_cost(tv, xm);
      note(pc, fm - 0.5 * (fa + fb), 1.0 + std::abs(fa) + std::abs(fb), describe("phi midpoint", xa, xb));
      const double ga = c.initial_cost(tv, ya[0]), gb = c.initial_cost(tv, yb[0]),
                   gm = c.initial_cost(tv, ym);
      note(gc, gm - 0.5 * (ga + gb), 1.0 + std::abs(ga) + std::abs(gb), describe("gamma midpoint", ya, yb));
      const double ta = c.terminal(tv, xa, ma), tb = c.terminal(tv, xb, mb), tm = c.terminal(tv, xm, mm);
      std::vector<double> qa{xa.begin(), xa.end()}, qb{xb.begin(), xb.end()};
      qa.insert(qa.end(), ma.begin(), ma.end());
      qb.insert(qb.end(), mb.begin(), mb.end());
      note(tc, 0.5 * (ta + tb) - tm, 1.0 + std::abs(ta) + std::abs(tb), describe("Phi midpoint", qa, qb));
    }
  }
  rep.hypotheses = {hc, pc, gc, tc};
  for (const auto& h : rep.hypotheses) rep.hypotheses_hold = rep.hypotheses_hold && h.passed;

  for (std::size_t m = 0; m < probes.size(); ++m)
    for (double lam : lambdas) {
      const ControlProcess vl = vbar.toward(probes[m], lam);
      const RobustEvaluation ev = evaluate_J(spec, vl, noise);
      const MeanAndError diff = robust_difference(base.eval, ev);
      ProbeCheck pc2;
      pc2.probe = m;
      pc2.lambda = lam;
      pc2.difference = diff.mean;
      pc2.se = base.eval.value_se;
      pc2.passed = diff.mean >= -2.0 * pc2.se;
      rep.probes_pass = rep.probes_pass && pc2.passed;
      rep.probes.push_back(pc2);
    }
  if (!rep.probes_pass)
    rep.verdict = "not optimal";
  else if (!rep.hypotheses_hold)
    rep.verdict = "inconclusive";
  else
    rep.verdict = "optimal";
  return rep;
}

}  // namespace rmp
