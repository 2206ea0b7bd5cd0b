#pragma once

#include <span>
#include <vector>

#include "rmp/variation.hpp"

namespace rmp {

// Adjoint processes along a base solution. p is scalar; q in R^n; r in R^{n x d}
// stored as [i * d + c].
struct AdjointTriple {
  double theta = 0.0;
  PathField p;        // [node][path]
  PathField q;        // [node][path][n]
  PathField r;        // [node][path][n * d]; the last node is zero
  PathField q_ahead;  // [step][path][n] = E_i[q_{i+1}]
};

// f_y along the base solution, [step][path].
PathField y_sensitivity(const ScenarioSpec& spec, const StateSolution& base);

// p(t) = -gamma_y(Y(0)) exp(sum f_y dt) E(int f_z dW)(t), accumulated in log space.
PathField solve_adjoint_p(const ScenarioSpec& spec, const StateSolution& base,
                          const BrownianEnsemble& noise);

// Euler scheme for dp = f_y p dt + f_z p dW on the same increments.
PathField solve_adjoint_p_euler(const ScenarioSpec& spec, const StateSolution& base,
                                const BrownianEnsemble& noise);

// -dq = (-f_x p + b_x^T q + sum_c (sigma^c_x)^T r^c - E[f_x' p] + E[b_x'^T q]) dt - r dW,
// q(T) = -Phi_x p(T) - E[Phi_x' p(T)] + phi_x(X(T)).
AdjointTriple solve_adjoint_qr(const ScenarioSpec& spec, const StateSolution& base, PathField p,
                               const BrownianEnsemble& noise);

AdjointTriple solve_adjoint(const ScenarioSpec& spec, const StateSolution& base,
                            const BrownianEnsemble& noise);

// H = q^T b + sum_c (r^c)^T sigma^c - p f.
double hamiltonian(const ScenarioSpec& spec, double theta, const Point& at, double p,
                   std::span<const double> q, std::span<const double> r);

// dH/dv at one point, written to out (size k).
void hamiltonian_dv(const ScenarioSpec& spec, double theta, const Point& at, double p,
                    std::span<const double> q, std::span<const double> r, std::span<double> out);

// dH/dv along the base trajectories, [step][path][k]. On the grid q is taken as
// E_i[q_{i+1}] and p as p_i exp(f_y dt), the values that multiply a control
// change on [t_i, t_{i+1}) in the discrete system.
PathField lambda_gradient(const ScenarioSpec& spec, const StateSolution& base,
                          const AdjointTriple& adjoint);

// Ensemble mean and standard error of the gradient per step, [step * k + j].
struct GradientMean {
  std::vector<double> mean;
  std::vector<double> se;
};
GradientMean gradient_mean(const PathField& lambda);

struct DualityResult {
  double lhs = 0.0;     // E[phi_x X1(T)] + gamma_y Y1(0)
  double rhs = 0.0;     // E[int <dH/dv, v - vbar> dt]
  double lhs_se = 0.0;
  double rhs_se = 0.0;
  double gap = 0.0;     // |lhs - rhs| / (|lhs| + |rhs| + 1e-12)
};

DualityResult duality_check(const ScenarioSpec& spec, const StateSolution& base,
                            const AdjointTriple& adjoint, const ControlProcess& v,
                            const BrownianEnsemble& noise);
DualityResult duality_check(const ScenarioSpec& spec, double theta, const ControlProcess& vbar,
                            const ControlProcess& v, const BrownianEnsemble& noise);

struct ThetaGaps {
  double x = 0.0, y = 0.0, x1 = 0.0, y1 = 0.0;  // E[sup_t |. - .|^p]
  double p = 0.0, q = 0.0;
  double r = 0.0;                               // E[(int |r - r'|^2 dt)^{p/2}]
  double p_m = INFINITY;
};

// Gaps between the solutions at two parameter coordinates on common increments.
// The exponent must lie in the admissible band of the estimated p_M.
ThetaGaps theta_continuity_probe(const ScenarioSpec& spec, double theta_a, double theta_b,
                                 const ControlProcess& vbar, const ControlProcess& v,
                                 double exponent, const BrownianEnsemble& noise);

}  // namespace rmp
