#include "rmp/robust.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "rmp/simplex.hpp"

namespace rmp {

namespace {

std::vector<double> vertex_samples(const MeasurePolytope& poly, std::size_t j,
                                   const std::vector<std::vector<double>>& samples) {
  const auto& w = poly.vertex(j);
  std::vector<double> out(samples.empty() ? 0 : samples[0].size(), 0.0);
  for (std::size_t th = 0; th < samples.size(); ++th)
    if (w[th] != 0.0)
      for (std::size_t p = 0; p < out.size(); ++p) out[p] += w[th] * samples[th][p];
  return out;
}

}  // namespace

RobustEvaluation robust_value(const MeasurePolytope& polytope, std::vector<double> g,
                              std::vector<std::vector<double>> samples, double eps_rel,
                              double se_mult) {
  if (polytope.size() == 0) throw ConfigError("measure polytope has no vertices");
  if (!samples.empty() && samples.size() != g.size())
    throw ConfigError("samples do not match the objective vector");
  RobustEvaluation ev;
  ev.g = std::move(g);
  ev.samples = std::move(samples);
  ev.g_se.assign(ev.g.size(), 0.0);
  for (std::size_t th = 0; th < ev.samples.size(); ++th) ev.g_se[th] = sample_mean(ev.samples[th]).se;
  ev.vertex_values.resize(polytope.size());
  for (std::size_t j = 0; j < polytope.size(); ++j) {
    ev.vertex_values[j] = polytope.pairing(j, ev.g);
    if (ev.vertex_values[j] > ev.vertex_values[ev.argmax]) ev.argmax = j;
  }
  ev.value = ev.vertex_values[ev.argmax];
  ev.argmax_weights = polytope.vertex(ev.argmax);
  ev.eps = eps_rel * (1.0 + std::abs(ev.value));
  std::vector<double> best;
  if (!ev.samples.empty()) {
    best = vertex_samples(polytope, ev.argmax, ev.samples);
    ev.value_se = sample_mean(best).se;
  }
  for (std::size_t j = 0; j < polytope.size(); ++j) {
    double se = 0.0;
    if (!ev.samples.empty() && j != ev.argmax) {
      std::vector<double> diff = vertex_samples(polytope, j, ev.samples);
      for (std::size_t p = 0; p < diff.size(); ++p) diff[p] = best[p] - diff[p];
      se = sample_mean(diff).se;
    }
    if (ev.value - ev.vertex_values[j] <= ev.eps + se_mult * se) ev.active.push_back(j);
  }
  return ev;
}

RobustState evaluate_states(const ScenarioSpec& spec, const ControlProcess& control,
                            const BrownianEnsemble& noise) {
  const auto& c = spec.coef();
  const std::size_t N = noise.grid().n_steps, P = noise.n_paths();
  RobustState rs;
  std::vector<double> g;
  std::vector<std::vector<double>> samples;
  for (const auto& pt : spec.theta.points()) {
    StateSolution st;
    try {
      st = solve_state(spec, pt.coord, control, noise);
    } catch (const SolverError& e) {
      throw SolverError("parameter " + pt.label + ": " + e.what());
    }
    const double y0 = st.backward.y0();
    const double gam = c.initial_cost(pt.coord, y0), gy = c.initial_cost_dy(pt.coord, y0);
    const std::vector<double> ys = st.backward.y0_samples();
    std::vector<double> s(P);
    double phi_mean = 0.0;
    for (std::size_t p = 0; p < P; ++p) {
      const double phi = c.terminal_cost(pt.coord, st.forward.x.row(N, p));
      phi_mean += phi;
      s[p] = phi + gam + gy * (ys[p] - y0);
    }
    phi_mean /= static_cast<double>(P);
    g.push_back(phi_mean + gam);
    samples.push_back(std::move(s));
    rs.states.push_back(std::move(st));
  }
  rs.eval = robust_value(spec.polytope, std::move(g), std::move(samples),
                         spec.solver.argmax_eps_rel, spec.solver.argmax_se_mult);
  return rs;
}

RobustEvaluation evaluate_J(const ScenarioSpec& spec, const ControlProcess& control,
                            const BrownianEnsemble& noise) {
  return evaluate_states(spec, control, noise).eval;
}

MeanAndError robust_difference(const RobustEvaluation& a, const RobustEvaluation& b) {
  const double diff = b.value - a.value;
  if (a.samples.empty() || b.samples.empty() || a.samples.size() != b.samples.size() ||
      a.samples[0].size() != b.samples[0].size())
    return {diff, 0.0};
  const std::size_t P = a.samples[0].size();
  std::vector<double> d(P, 0.0);
  for (std::size_t th = 0; th < a.samples.size(); ++th)
    for (std::size_t p = 0; p < P; ++p)
      d[p] += b.argmax_weights[th] * b.samples[th][p] - a.argmax_weights[th] * a.samples[th][p];
  return {diff, sample_mean(d).se};
}

DerivativeResult variational_derivative(const ScenarioSpec& spec, const RobustState& base,
                                        const ControlProcess& v, const BrownianEnsemble& noise) {
  const auto& c = spec.coef();
  const std::size_t n = c.state_dim(), N = noise.grid().n_steps, P = noise.n_paths();
  DerivativeResult out;
  std::vector<double> phix(n);
  for (const StateSolution& st : base.states) {
    const double th = st.theta();
    const VariationalSolution var = solve_variational(spec, st, v, noise);
    const double gy = c.initial_cost_dy(th, st.backward.y0());
    const std::vector<double> y1 = var.yz.y0_samples();
    std::vector<double> s(P);
    for (std::size_t p = 0; p < P; ++p) {
      c.terminal_cost_dx(th, st.forward.x.row(N, p), phix);
      double val = gy * y1[p];
      for (std::size_t i = 0; i < n; ++i) val += phix[i] * var.x1(N, p, i);
      s[p] = val;
    }
    const MeanAndError me = sample_mean(s);
    out.h.push_back(me.mean);
    out.h_se.push_back(me.se);
    out.samples.push_back(std::move(s));
  }
  out.active = base.eval.active;
  out.value = -INFINITY;
  for (std::size_t j : out.active) {
    const double val = spec.polytope.pairing(j, out.h);
    if (val > out.value) {
      out.value = val;
      out.attained = j;
    }
  }
  return out;
}

DerivativeResult variational_derivative(const ScenarioSpec& spec, const ControlProcess& vbar,
                                        const ControlProcess& v, const BrownianEnsemble& noise) {
  return variational_derivative(spec, evaluate_states(spec, vbar, noise), v, noise);
}

std::vector<ControlProcess> make_probes(const ScenarioSpec& spec, const ControlProcess& vbar,
                                        std::size_t n_random, std::uint64_t seed,
                                        const std::vector<double>* direction) {
  if (vbar.is_feedback()) throw DomainError("probes need a deterministic control");
  const std::size_t N = vbar.n_steps(), k = vbar.dim();
  const auto& lo = spec.controls.lower();
  const auto& hi = spec.controls.upper();
  std::vector<double> size(k);
  for (std::size_t j = 0; j < k; ++j) size[j] = 0.25 * (hi[j] - lo[j]);
  auto finish = [&](ControlProcess v) {
    for (std::size_t s = 0; s < N; ++s) spec.controls.project(v.at(s));
    return v;
  };
  std::vector<ControlProcess> out;
  const std::size_t blocks = std::min<std::size_t>(4, N);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t b = 0; b < blocks; ++b)
      for (double sign : {1.0, -1.0}) {
        ControlProcess v = vbar;
        for (std::size_t s = b * N / blocks; s < (b + 1) * N / blocks; ++s) v.at(s)[j] += sign * size[j];
        out.push_back(finish(std::move(v)));
      }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (std::size_t r = 0; r < n_random; ++r) {
    ControlProcess v = vbar;
    for (std::size_t s = 0; s < N; ++s)
      for (std::size_t j = 0; j < k; ++j) v.at(s)[j] += size[j] * normal(rng);
    out.push_back(finish(std::move(v)));
  }
  if (direction) {
    if (direction->size() != N * k) throw ConfigError("probe direction has the wrong size");
    double scale = 0.0;
    for (double e : *direction) scale = std::max(scale, std::abs(e));
    if (scale > 0.0) {
      ControlProcess v = vbar;
      for (std::size_t s = 0; s < N; ++s)
        for (std::size_t j = 0; j < k; ++j) v.at(s)[j] -= size[j] * (*direction)[s * k + j] / scale;
      out.push_back(finish(std::move(v)));
    }
  }
  return out;
}

QBarResult find_Q_bar(const ScenarioSpec& spec, const RobustState& base,
                      const std::vector<ControlProcess>& probes, const BrownianEnsemble& noise) {
  if (probes.empty()) throw ConfigError("find_Q_bar needs at least one probe");
  const std::size_t T = spec.theta.size(), M = probes.size();
  QBarResult out;
  out.active = base.eval.active;
  const std::size_t A = out.active.size();
  out.h.assign(M * T, 0.0);
  std::vector<double> payoff(A * M), se2(A * M);
  for (std::size_t m = 0; m < M; ++m) {
    const DerivativeResult dr = variational_derivative(spec, base, probes[m], noise);
    for (std::size_t th = 0; th < T; ++th) out.h[m * T + th] = dr.h[th];
    for (std::size_t a = 0; a < A; ++a) {
      const auto& w = spec.polytope.vertex(out.active[a]);
      payoff[a * M + m] = spec.polytope.pairing(out.active[a], dr.h);
      std::vector<double> s(noise.n_paths(), 0.0);
      for (std::size_t th = 0; th < T; ++th)
        for (std::size_t p = 0; p < s.size(); ++p) s[p] += w[th] * dr.samples[th][p];
      const double se = sample_mean(s).se;
      se2[a * M + m] = se * se;
    }
  }
  double pooled = 0.0;
  for (double e : se2) pooled += e;
  out.tol = spec.solver.tol_mult * std::sqrt(pooled / static_cast<double>(se2.size()));

  const GameSolution game = solve_matrix_game(payoff, A, M);
  out.vertex_weights = game.weights;
  out.q_bar.assign(T, 0.0);
  for (std::size_t a = 0; a < A; ++a)
    for (std::size_t th = 0; th < T; ++th)
      out.q_bar[th] += game.weights[a] * spec.polytope.vertex(out.active[a])[th];
  out.probe_values.resize(M);
  for (std::size_t m = 0; m < M; ++m) {
    double val = 0.0;
    for (std::size_t th = 0; th < T; ++th) val += out.q_bar[th] * out.h[m * T + th];
    out.probe_values[m] = val;
  }
  out.value = game.value;
  out.worst_probe = game.worst_column;
  out.feasible = out.value >= -out.tol;

  std::vector<double> dual(M * A);
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t a = 0; a < A; ++a) dual[m * A + a] = -payoff[a * M + m];
  const GameSolution mix = solve_matrix_game(dual, M, A);
  out.certificate = mix.weights;
  out.certificate_value = -mix.value;
  return out;
}

QBarResult find_Q_bar(const ScenarioSpec& spec, const ControlProcess& vbar,
                      const std::vector<ControlProcess>& probes, const BrownianEnsemble& noise) {
  return find_Q_bar(spec, evaluate_states(spec, vbar, noise), probes, noise);
}

}  // namespace rmp
