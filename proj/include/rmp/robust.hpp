#pragma once

#include <cstdint>
#include <vector>

#include "rmp/adjoint.hpp"

namespace rmp {

struct RobustEvaluation {
  std::vector<double> g;                      // per parameter: E[phi(X(T))] + gamma(Y(0))
  std::vector<double> g_se;
  std::vector<std::vector<double>> samples;   // [theta][path], per-path contributions to g
  std::vector<double> vertex_values;          // <Q_j, g>
  double value = 0.0;                         // J
  double value_se = 0.0;
  std::size_t argmax = 0;
  std::vector<double> argmax_weights;         // the attaining vertex over the parameters
  std::vector<std::size_t> active;            // epsilon-argmax vertices
  double eps = 0.0;
};

// Vertex maximum and epsilon-argmax of a given objective vector. A vertex is
// active when J - <Q_j, g> <= eps_rel (1 + |J|) + se_mult * SE(difference); the
// standard error uses the per-path samples when present.
RobustEvaluation robust_value(const MeasurePolytope& polytope, std::vector<double> g,
                              std::vector<std::vector<double>> samples, double eps_rel,
                              double se_mult);

struct RobustState {
  RobustEvaluation eval;
  std::vector<StateSolution> states;  // per parameter, common increments
};

RobustState evaluate_states(const ScenarioSpec& spec, const ControlProcess& control,
                            const BrownianEnsemble& noise);
RobustEvaluation evaluate_J(const ScenarioSpec& spec, const ControlProcess& control,
                            const BrownianEnsemble& noise);

// J(b) - J(a) with the standard error of the paired per-path difference.
MeanAndError robust_difference(const RobustEvaluation& a, const RobustEvaluation& b);

struct DerivativeResult {
  double value = 0.0;                 // max over active vertices of <Q, h>
  std::vector<double> h;              // per parameter: E[phi_x X1(T)] + gamma_y Y1(0)
  std::vector<double> h_se;
  std::vector<std::vector<double>> samples;  // [theta][path]
  std::vector<std::size_t> active;
  std::size_t attained = 0;
};

DerivativeResult variational_derivative(const ScenarioSpec& spec, const RobustState& base,
                                        const ControlProcess& v, const BrownianEnsemble& noise);
DerivativeResult variational_derivative(const ScenarioSpec& spec, const ControlProcess& vbar,
                                        const ControlProcess& v, const BrownianEnsemble& noise);

// Probe controls around vbar: signed block bumps per coordinate over four time
// blocks, Gaussian bumps, and optionally the projected steepest-descent step along
// `direction` ([step * k + j]). Bump size is a quarter of each box side.
std::vector<ControlProcess> make_probes(const ScenarioSpec& spec, const ControlProcess& vbar,
                                        std::size_t n_random, std::uint64_t seed,
                                        const std::vector<double>* direction = nullptr);

struct QBarResult {
  bool feasible = false;
  std::vector<double> q_bar;              // weights on the parameter points
  std::vector<std::size_t> active;        // vertices of the worst-case set
  std::vector<double> vertex_weights;     // over `active`
  double value = 0.0;                     // min over probes of <q_bar, h(v)>
  double tol = 0.0;
  std::vector<double> h;                  // [probe * n_theta + theta]
  std::vector<double> probe_values;       // <q_bar, h(v)> per probe
  std::size_t worst_probe = 0;
  std::vector<double> certificate;        // probe mixture separating all of conv(active)
  double certificate_value = 0.0;         // max over active vertices of <Q, h(mixture)>
};

// Finds q_bar in the hull of the worst-case vertices with <q_bar, h(v)> >= -tol
// for every probe, tol = tol_mult pooled standard errors. When none exists the
// probe mixture from the dual problem is returned as the certificate.
QBarResult find_Q_bar(const ScenarioSpec& spec, const RobustState& base,
                      const std::vector<ControlProcess>& probes, const BrownianEnsemble& noise);
QBarResult find_Q_bar(const ScenarioSpec& spec, const ControlProcess& vbar,
                      const std::vector<ControlProcess>& probes, const BrownianEnsemble& noise);

}  // namespace rmp
