#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rmp/robust.hpp"

namespace rmp {

// Ensemble-mean gradient dH/dv per parameter point at the control of `base`.
std::vector<GradientMean> robust_gradients(const ScenarioSpec& spec, const RobustState& base,
                                           const BrownianEnsemble& noise);

struct MpResidualReport {
  std::vector<double> residual;    // per step: min over V of <D(t_i), u - vbar(t_i)>
  std::vector<double> step_se;     // standard error of that value
  std::vector<double> direction;   // D = sum_theta Q(theta) E[dH/dv], [step * k + j]
  std::vector<double> q_bar;       // multiplier on the parameter points
  double min_residual = 0.0;
  std::size_t worst_step = 0;
  double tol = 0.0;                // tol_mult pooled standard errors
  std::vector<std::size_t> flagged;  // steps with residual < -tol
  bool certified = false;
};

// Residual for a fixed multiplier. per_axis = 0 minimizes over the corners of the
// box (exact for a linear functional); otherwise over a tensor grid.
MpResidualReport mp_residual(const ScenarioSpec& spec, const ControlProcess& vbar,
                             const std::vector<GradientMean>& gradients,
                             const std::vector<double>& q_bar, std::size_t per_axis = 0);

// Residual with the multiplier chosen in the hull of the given vertices to
// maximize the worst step residual.
MpResidualReport mp_residual(const ScenarioSpec& spec, const ControlProcess& vbar,
                             const std::vector<GradientMean>& gradients,
                             const std::vector<std::size_t>& vertices);

// Solves the state and adjoint systems at vbar; an empty q_bar selects the
// multiplier over the epsilon-argmax vertices.
MpResidualReport mp_residual(const ScenarioSpec& spec, const ControlProcess& vbar,
                             const BrownianEnsemble& noise, const std::vector<double>& q_bar = {});

struct DescentOptions {
  std::size_t max_iters = 50;
  double step = 1.0;        // initial step size
  double min_step = 1e-4;
  double max_step = 64.0;
  double armijo = 0.1;      // fraction of the predicted decrease required
  std::size_t dual_iters = 400;
};

struct OptimizationTrace {
  std::vector<ControlProcess> iterates;
  std::vector<double> values;          // J(v_k)
  std::vector<double> value_se;
  std::vector<double> steps;           // step size that produced v_k (0 for v_0)
  std::vector<std::size_t> worst_vertex;
  std::vector<std::vector<double>> weights;  // Q_k over the vertices
  std::size_t rejected = 0;            // rejected line-search trials
  MpResidualReport residual;           // at the final iterate
  bool certified = false;
  bool stalled = false;
  std::string stop_reason;

  const ControlProcess& final_control() const { return iterates.back(); }
  std::size_t accepted_steps() const { return iterates.empty() ? 0 : iterates.size() - 1; }
};

// Projected descent v_{k+1} = Proj_V(v_k - eta D_k) with D_k = sum_j Q_k(j) G_j, where
// Q_k solves the dual of the linearized min-max step
//   min_delta max_j (J_j + <G_j, delta>) + |delta|^2 / (2 eta).
// A step is accepted when J decreases by armijo times the predicted decrease.
OptimizationTrace robust_descent(const ScenarioSpec& spec, const ControlProcess& v0,
                                 const BrownianEnsemble& noise, const DescentOptions& options = {});

struct ConvexityCheck {
  std::string name;
  bool passed = true;
  double worst_excess = 0.0;
  std::string witness;
};

struct ProbeCheck {
  std::size_t probe = 0;
  double lambda = 0.0;
  double difference = 0.0;  // J(vbar + lambda (v - vbar)) - J(vbar)
  double se = 0.0;
  bool passed = true;
};

struct AuditReport {
  std::vector<ConvexityCheck> hypotheses;
  std::vector<ProbeCheck> probes;
  bool hypotheses_hold = true;
  bool probes_pass = true;
  std::string verdict;  // "optimal", "inconclusive" or "not optimal"
};

// Midpoint probes of the convexity hypotheses (H in (x, x', y, z, v) with adjoint
// values sampled along vbar, phi in x, gamma in y, concavity of Phi in (x, x')) and
// the comparison J(vbar + lambda (v - vbar)) >= J(vbar) - 2 SE.
AuditReport sufficiency_audit(const ScenarioSpec& spec, const ControlProcess& vbar,
                              const std::vector<double>& q_bar,
                              const std::vector<ControlProcess>& probes,
                              const std::vector<double>& lambdas, const BrownianEnsemble& noise,
                              std::size_t n_midpoints = 200, std::uint64_t seed = 99);

}  // namespace rmp
