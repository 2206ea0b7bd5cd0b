#pragma once

#include <vector>

#include "rmp/backward.hpp"
#include "rmp/bmo.hpp"

namespace rmp {

// Forward and backward solution at one control and parameter value.
struct StateSolution {
  PathEnsemble forward;
  BackwardSolution backward;
  double theta() const { return forward.theta; }
};

StateSolution solve_state(const ScenarioSpec& spec, double theta, const ControlProcess& control,
                          const BrownianEnsemble& noise);

// Backward options for linear equations: the scenario's basis, no truncation.
BackwardOptions linear_options(const ScenarioSpec& spec);

// Linearization of the forward equation along v - vbar:
//   dX1 = (b_x X1 + b_x' E[X1] + b_v (v - vbar)) dt + sum_c (sigma^c_x X1 + sigma^c_v (v - vbar)) dW^c.
PathField solve_variational_sde(const ScenarioSpec& spec, const StateSolution& base,
                                const ControlProcess& v, const BrownianEnsemble& noise);

// Linear BSDE with y-coefficient f_y, z-coefficient f_z along the base solution,
// inhomogeneity f_x X1 + f_x' E[X1] + f_v (v - vbar), terminal Phi_x X1(T) + Phi_x' E[X1(T)].
BackwardSolution solve_variational_bsde(const ScenarioSpec& spec, const StateSolution& base,
                                        const PathField& x1, const ControlProcess& v,
                                        const BrownianEnsemble& noise);

struct VariationalSolution {
  PathField x1;
  BackwardSolution yz;  // Y1, Z1
};

VariationalSolution solve_variational(const ScenarioSpec& spec, const StateSolution& base,
                                      const ControlProcess& v, const BrownianEnsemble& noise);

// f_z along the base solution, [step][path][d].
PathField z_sensitivity(const ScenarioSpec& spec, const StateSolution& base);

struct DeltaProcesses {
  double lambda = 0.0;
  PathField dx;  // (X^lambda - X) / lambda - X1
  PathField dy;  // same for Y
  PathField dz;  // same for Z
};

// Solves the state at vbar + lambda (v - vbar) on the same increments and forms the differences.
DeltaProcesses delta_processes(const ScenarioSpec& spec, const StateSolution& base,
                               const VariationalSolution& var, const ControlProcess& v,
                               double lambda, const BrownianEnsemble& noise);

struct DeltaNorms {
  double x = 0.0;  // E[sup_t |dX|^p]
  double y = 0.0;  // E[sup_t G(t) |dY(t)|^p]
  double z = 0.0;  // E[(int G^{2/p} |dZ|^2 dt)^{p/2}]
};

// Norms of the delta processes with weight G = E(int f_z dW); an empty weight means G = 1.
DeltaNorms delta_norms(const DeltaProcesses& delta, const PathField& weight, double p,
                       const TimeGrid& grid);

struct DeltaDiagnostics {
  std::vector<double> lambdas;
  std::vector<DeltaNorms> norms;  // sup over parameter values, per lambda
  double slope_x = 0.0, slope_y = 0.0, slope_z = 0.0;
  double p = 2.0;
  double p_m = INFINITY;      // estimated critical exponent of f_z . W (worst parameter)
  double band_low = 1.0, band_high = 2.0;
};

// Admissible exponent band (max(1, 2 * 1.1 / p_M), 2).
std::pair<double, double> exponent_band(double p_m);

DeltaDiagnostics convergence_sweep(const ScenarioSpec& spec, const std::vector<double>& thetas,
                                   const ControlProcess& vbar, const ControlProcess& v,
                                   const std::vector<double>& lambdas, double p,
                                   const BrownianEnsemble& noise);

// Least-squares slope of log(values) against log(lambdas); NaN if any value is not positive.
double loglog_slope(const std::vector<double>& lambdas, const std::vector<double>& values);

}  // namespace rmp
