#include "rmp/backward.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

namespace rmp {

BackwardOptions backward_options(const ScenarioSpec& spec) {
  BackwardOptions o;
  o.basis = spec.basis;
  o.picard_tol = spec.solver.picard_tol;
  o.picard_max = spec.solver.picard_max;
  o.y_cap = spec.y_cap();
  o.blowup_cap = spec.solver.blowup_cap;
  return o;
}

std::vector<double> BackwardSolution::y0_samples(std::size_t c) const {
  const std::size_t m = width();
  const std::size_t P = pathwise_y0.size() / std::max<std::size_t>(m, 1);
  std::vector<double> xs(P);
  double mean = 0.0;
  for (std::size_t p = 0; p < P; ++p) {
    xs[p] = pathwise_y0[p * m + c];
    mean += xs[p];
  }
  mean /= static_cast<double>(std::max<std::size_t>(P, 1));
  const double shift = y0(c) - mean;
  for (double& x : xs) x += shift;
  return xs;
}

MeanAndError BackwardSolution::y0_estimate(std::size_t c) const {
  return sample_mean(y0_samples(c));
}

namespace {

// Fills y(step) and the generator values G (path-major, width m) given the
// conditional expectations E and the regressed Z at that step.
using StepSolver = std::function<void(std::size_t step, std::span<const double> cond,
                                      std::span<const double> z, std::span<double> y,
                                      std::span<double> gen)>;

BackwardSolution run_backward(std::size_t m, std::span<const double> terminal,
                              const RegressionState& state, const BrownianEnsemble& noise,
                              const BackwardOptions& options, const StepSolver& step_solver) {
  if (!state.features) throw ConfigError("backward solver needs regression features");
  const PathField& feat = *state.features;
  const std::size_t N = noise.grid().n_steps, P = noise.n_paths(), d = noise.dim();
  const double dt = noise.grid().dt();
  if (feat.nodes() != N + 1 || feat.paths() != P)
    throw ConfigError("regression features do not match the Brownian ensemble");
  if (state.aux && (state.aux->nodes() != N + 1 || state.aux->paths() != P))
    throw ConfigError("auxiliary regressors do not match the Brownian ensemble");
  if (terminal.size() != P * m) throw ConfigError("terminal values have the wrong size");

  BackwardSolution sol;
  sol.y = PathField(N + 1, P, m);
  sol.z = PathField(N + 1, P, m * d);
  sol.regression_residual.assign(N, 0.0);
  if (options.keep_conditional) sol.conditional = PathField(N, P, m);
  std::vector<double> acc(P * m, 0.0);
  for (std::size_t i = 0; i < P * m; ++i) {
    if (!std::isfinite(terminal[i])) throw DivergedError("non-finite terminal value");
    sol.y.data()[N * P * m + i] = terminal[i];
  }

  std::vector<double> cond(P * m), zbuf(P * m * d), target(P), fitted(P), gen(P * m);
  std::vector<double> path_next(P), path_cond(P);
  for (std::size_t s = N; s-- > 0;) {
    const std::size_t aw = state.aux ? state.aux->width() : 0;
    std::span<const double> aux_slice;
    if (state.aux) aux_slice = state.aux->slice(s);
    Projector proj(feat.slice(s), feat.width(), P, options.basis, aux_slice, aw);
    auto next = sol.y.slice(s + 1);
    double resid = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      proj.project(next, fitted, m, c);
      for (std::size_t p = 0; p < P; ++p) {
        cond[p * m + c] = fitted[p];
        const double r = next[p * m + c] - fitted[p];
        resid += r * r;
      }
      for (std::size_t p = 0; p < P; ++p) path_next[p] = terminal[p * m + c] + acc[p * m + c];
      proj.project(path_next, path_cond);
      for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t p = 0; p < P; ++p)
          target[p] = (path_next[p] - path_cond[p]) * noise.increment(s, p, j);
        proj.project(target, fitted);
        for (std::size_t p = 0; p < P; ++p) zbuf[(p * m + c) * d + j] = fitted[p] / dt;
      }
    }
    sol.regression_residual[s] = std::sqrt(resid / static_cast<double>(P * m));
    if (options.keep_conditional) {
      auto dst = sol.conditional.slice(s);
      std::copy(cond.begin(), cond.end(), dst.begin());
    }

    auto ys = sol.y.slice(s);
    step_solver(s, cond, zbuf, ys, gen);
    auto zs = sol.z.slice(s);
    std::copy(zbuf.begin(), zbuf.end(), zs.begin());
    for (std::size_t p = 0; p < P; ++p) {
      for (std::size_t c = 0; c < m; ++c) {
        double& y = ys[p * m + c];
        if (!std::isfinite(y) || std::abs(y) > options.blowup_cap)
          throw DivergedError("backward value diverged on path " + std::to_string(p) + " at step " +
                              std::to_string(s));
        double mart = 0.0;
        for (std::size_t j = 0; j < d; ++j) mart += zbuf[(p * m + c) * d + j] * noise.increment(s, p, j);
        acc[p * m + c] += gen[p * m + c] * dt - mart;
        if (options.y_cap) y = std::clamp(y, -*options.y_cap, *options.y_cap);
      }
    }
  }
  sol.pathwise_y0.resize(P * m);
  for (std::size_t i = 0; i < P * m; ++i) sol.pathwise_y0[i] = terminal[i] + acc[i];
  return sol;
}

void check_field(const PathField& f, std::size_t N, std::size_t P, std::size_t width, const char* name) {
  if (f.empty()) return;
  if (f.nodes() < N || f.paths() != P || f.width() != width)
    throw ConfigError(std::string("linear BSDE field '") + name + "' has the wrong shape");
}

BackwardSolution linear_impl(const LinearBsde& pr, const RegressionState& state,
                             const BrownianEnsemble& noise, const BackwardOptions& options,
                             bool mean_field) {
  const std::size_t m = pr.width, N = noise.grid().n_steps, P = noise.n_paths(), d = noise.dim();
  const double dt = noise.grid().dt();
  check_field(pr.y_coef, N, P, m * m, "y_coef");
  check_field(pr.z_coef, N, P, m * m * d, "z_coef");
  check_field(pr.inhomogeneity, N, P, m, "inhomogeneity");
  check_field(pr.mean_y_coef, N, P, m * m, "mean_y_coef");
  check_field(pr.mean_inhomogeneity, N, P, m, "mean_inhomogeneity");
  if (!mean_field && (!pr.mean_y_coef.empty() || !pr.mean_inhomogeneity.empty()))
    throw ConfigError("expectation couplings need solve_meanfield_linear_bsde");
  const bool coupled = mean_field && (!pr.mean_y_coef.empty() || !pr.mean_inhomogeneity.empty());

  auto coupling = [&](std::size_t s, std::span<const double> y, std::vector<double>& out) {
    out.assign(m, 0.0);
    if (!pr.mean_y_coef.empty())
      for (std::size_t c = 0; c < m; ++c) {
        double acc = 0.0;
        for (std::size_t p = 0; p < P; ++p)
          for (std::size_t c2 = 0; c2 < m; ++c2) acc += pr.mean_y_coef(s, p, c * m + c2) * y[p * m + c2];
        out[c] += acc / static_cast<double>(P);
      }
    if (!pr.mean_inhomogeneity.empty())
      for (std::size_t c = 0; c < m; ++c) out[c] += pr.mean_inhomogeneity.mean(s, c);
  };

  StepSolver step = [&](std::size_t s, std::span<const double> cond, std::span<const double> z,
                        std::span<double> y, std::span<double> gen) {
    std::vector<double> cpl(m, 0.0);
    const int passes = coupled ? 2 : 1;
    Eigen::MatrixXd A(m, m);
    Eigen::VectorXd rhs(m), sol(m);
    for (int pass = 0; pass < passes; ++pass) {
      if (coupled) coupling(s, pass == 0 ? cond : std::span<const double>(y), cpl);
      for (std::size_t p = 0; p < P; ++p) {
        // explicit part: B[Z] + g + couplings
        for (std::size_t c = 0; c < m; ++c) {
          double e = cpl[c];
          if (!pr.inhomogeneity.empty()) e += pr.inhomogeneity(s, p, c);
          if (!pr.z_coef.empty())
            for (std::size_t c2 = 0; c2 < m; ++c2)
              for (std::size_t j = 0; j < d; ++j)
                e += pr.z_coef(s, p, (c * m + c2) * d + j) * z[(p * m + c2) * d + j];
          gen[p * m + c] = e;
          rhs(static_cast<Eigen::Index>(c)) = cond[p * m + c] + e * dt;
        }
        if (pr.y_coef.empty()) {
          for (std::size_t c = 0; c < m; ++c) y[p * m + c] = rhs(static_cast<Eigen::Index>(c));
        } else if (m == 1) {
          const double a = pr.y_coef(s, p, 0);
          y[p] = rhs(0) / (1.0 - a * dt);
          gen[p] += a * y[p];
        } else {
          for (std::size_t c = 0; c < m; ++c)
            for (std::size_t c2 = 0; c2 < m; ++c2)
              A(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c2)) =
                  (c == c2 ? 1.0 : 0.0) - pr.y_coef(s, p, c * m + c2) * dt;
          sol = A.partialPivLu().solve(rhs);
          for (std::size_t c = 0; c < m; ++c) {
            y[p * m + c] = sol(static_cast<Eigen::Index>(c));
            double ay = 0.0;
            for (std::size_t c2 = 0; c2 < m; ++c2) ay += pr.y_coef(s, p, c * m + c2) * sol(static_cast<Eigen::Index>(c2));
            gen[p * m + c] += ay;
          }
        }
      }
    }
  };
  return run_backward(m, pr.terminal, state, noise, options, step);
}

}  // namespace

BackwardSolution solve_bsde(std::span<const double> terminal, const ScalarGenerator& generator,
                            const RegressionState& state, const BrownianEnsemble& noise,
                            const BackwardOptions& options) {
  const std::size_t P = noise.n_paths(), d = noise.dim();
  const double dt = noise.grid().dt();
  std::size_t worst_iters = 0;
  StepSolver step = [&](std::size_t s, std::span<const double> cond, std::span<const double> z,
                        std::span<double> y, std::span<double> gen) {
    for (std::size_t p = 0; p < P; ++p) {
      const auto zp = z.subspan(p * d, d);
      double cur = cond[p];
      double g = generator(s, p, cur, zp);
      std::size_t it = 0;
      for (;;) {
        const double nxt = cond[p] + g * dt;
        ++it;
        if (std::abs(nxt - cur) < options.picard_tol) {
          cur = nxt;
          g = generator(s, p, cur, zp);
          break;
        }
        if (it >= options.picard_max)
          throw SolverError("Picard iteration did not converge at step " + std::to_string(s) +
                            " on path " + std::to_string(p));
        cur = nxt;
        g = generator(s, p, cur, zp);
        if (!std::isfinite(g))
          throw DivergedError("non-finite generator at step " + std::to_string(s) + " on path " +
                              std::to_string(p));
      }
      worst_iters = std::max(worst_iters, it);
      y[p] = cur;
      gen[p] = g;
    }
  };
  auto sol = run_backward(1, terminal, state, noise, options, step);
  sol.picard_iters = worst_iters;
  return sol;
}

BackwardSolution solve_bsde(const ScenarioSpec& spec, const PathEnsemble& ens,
                            const BrownianEnsemble& noise) {
  const auto& c = spec.coef();
  const std::size_t N = noise.grid().n_steps, P = noise.n_paths();
  const double th = ens.theta;
  std::vector<double> terminal(P);
  const auto mT = ens.mean_at(N);
  for (std::size_t p = 0; p < P; ++p) terminal[p] = c.terminal(th, ens.x.row(N, p), mT);
  const TimeGrid& grid = noise.grid();
  ScalarGenerator gen = [&](std::size_t s, std::size_t p, double y, std::span<const double> z) {
    return c.generator(th, Point{grid.time(s), ens.x.row(s, p), ens.mean_at(s), y, z, ens.control_at(s, p)});
  };
  RegressionState state{&ens.x, nullptr};
  return solve_bsde(terminal, gen, state, noise, backward_options(spec));
}

BackwardSolution solve_linear_bsde(const LinearBsde& problem, const RegressionState& state,
                                   const BrownianEnsemble& noise, const BackwardOptions& options) {
  return linear_impl(problem, state, noise, options, false);
}

BackwardSolution solve_meanfield_linear_bsde(const LinearBsde& problem, const RegressionState& state,
                                             const BrownianEnsemble& noise,
                                             const BackwardOptions& options) {
  return linear_impl(problem, state, noise, options, true);
}

}  // namespace rmp
