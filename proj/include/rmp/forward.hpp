#pragma once

#include <functional>
#include <span>
#include <vector>

#include "rmp/scenario.hpp"

namespace rmp {

// Particle solution of the mean-field forward equation for one parameter value.
struct PathEnsemble {
  double theta = 0.0;           // parameter coordinate
  TimeGrid grid;
  PathField x;                  // [node][path][n]
  std::vector<double> mean;     // [node * n + i], ensemble average of x
  ControlProcess control;
  PathField control_values;     // [step][path][k]; filled only for feedback controls

  std::size_t n_paths() const { return x.paths(); }
  std::size_t n_nodes() const { return x.nodes(); }
  std::span<const double> mean_at(std::size_t node) const {
    return {mean.data() + node * x.width(), x.width()};
  }
  std::span<const double> control_at(std::size_t step, std::size_t path) const {
    return control.is_feedback() ? control_values.row(step, path) : control.at(step);
  }
};

// Euler-Maruyama with a synchronous particle mean:
//   X_{i+1} = X_i + b(t_i, X_i, m_i, v_i) dt + sigma(t_i, X_i, v_i) dW_i.
// Throws DivergedError naming path and step when |X| leaves the blow-up cap.
PathEnsemble solve_forward(const ScenarioSpec& spec, double theta, const ControlProcess& control,
                           const BrownianEnsemble& noise);

// dX = (a1 X + phi1) dt + sum_c (a2_c X + phi2_c) dW^c per path; coefficient fields are
// [step][path] for a1, phi1 and [step][path][d] for a2, phi2. Empty fields mean zero.
PathField solve_linear_unbounded_sde(const PathField& a1, const PathField& phi1, const PathField& a2,
                                     const PathField& phi2, double x0, const BrownianEnsemble& noise,
                                     double blowup_cap = 1e12);

struct StrongError {
  double rms_terminal = 0.0;  // RMS over paths of |fine - coarse| at T
  double rms_sup = 0.0;       // RMS over paths of max over shared nodes
};

// Runs `solve` on an ensemble and on its coarsening and compares shared nodes.
StrongError strong_error_probe(const std::function<PathField(const BrownianEnsemble&)>& solve,
                               const BrownianEnsemble& fine);

}  // namespace rmp
