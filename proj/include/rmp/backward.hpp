#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "rmp/forward.hpp"
#include "rmp/regression.hpp"

namespace rmp {

struct BackwardOptions {
  RegressionBasis basis;
  double picard_tol = 1e-10;
  std::size_t picard_max = 50;
  std::optional<double> y_cap;
  double blowup_cap = 1e12;
  bool keep_conditional = false;  // store E_i[Y_{i+1}]
};

BackwardOptions backward_options(const ScenarioSpec& spec);

// Y in R^m, Z in R^{m x d} stored row-major as [c * d + j].
struct BackwardSolution {
  PathField y;                        // [node][path][m]
  PathField z;                        // [node][path][m * d]; the last node is zero
  std::vector<double> pathwise_y0;    // [path * m + c] = Y_N + sum G dt - sum Z dW
  std::size_t picard_iters = 0;       // worst step
  std::vector<double> regression_residual;  // per step, RMS of Y_{i+1} - E_i[Y_{i+1}]
  PathField conditional;              // [step][path][m] = E_i[Y_{i+1}] when requested

  std::size_t width() const { return y.width(); }
  double y0(std::size_t c = 0) const { return y.mean(0, c); }
  // Pathwise representation shifted to have mean Y(0). The raw representation
  // carries an in-sample regression bias of order (basis size) * steps / paths.
  std::vector<double> y0_samples(std::size_t c = 0) const;
  // Y(0) with the standard error of the pathwise representation.
  MeanAndError y0_estimate(std::size_t c = 0) const;
};

// Regressors: polynomial features per node plus optional auxiliary factors.
struct RegressionState {
  const PathField* features = nullptr;  // [node][path][w]
  const PathField* aux = nullptr;       // [node][path][a]
};

using ScalarGenerator =
    std::function<double(std::size_t step, std::size_t path, double y, std::span<const double> z)>;

// Backward recursion i = N-1..0. With the pathwise value U_{i+1} = Y_N + sum_{j>i} (f_j dt - Z_j dW_j),
// Z_i = E_i[(U_{i+1} - E_i[U_{i+1}]) dW_i] / dt, then Picard on Y_i = E_i[Y_{i+1}] + f(Y_i, Z_i) dt,
// then truncation to the cap.
BackwardSolution solve_bsde(std::span<const double> terminal, const ScalarGenerator& generator,
                            const RegressionState& state, const BrownianEnsemble& noise,
                            const BackwardOptions& options);

// The backward equation of the scenario along a forward ensemble.
BackwardSolution solve_bsde(const ScenarioSpec& spec, const PathEnsemble& ensemble,
                            const BrownianEnsemble& noise);

// -dY = (A Y + B[Z] + g + E[eta Y] + E[zeta]) dt - Z dW with
//   y_coef A: [step][path][m * m], z_coef B: [step][path][m * m * d] (B[c][c'][j] at
//   (c * m + c') * d + j), inhomogeneity g and mean_inhomogeneity zeta: [step][path][m],
//   mean_y_coef eta: [step][path][m * m]. Empty fields are zero.
struct LinearBsde {
  std::size_t width = 1;
  std::vector<double> terminal;  // [path * m + c]
  PathField y_coef;
  PathField z_coef;
  PathField inhomogeneity;
  PathField mean_y_coef;
  PathField mean_inhomogeneity;
};

// Linear generators are solved exactly in Y_i; no Picard loop is needed.
BackwardSolution solve_linear_bsde(const LinearBsde& problem, const RegressionState& state,
                                   const BrownianEnsemble& noise, const BackwardOptions& options);

// As solve_linear_bsde with the expectation couplings: at each step the couplings
// are evaluated on E_i[Y_{i+1}], the step is solved, and the couplings are
// re-evaluated once on the result.
BackwardSolution solve_meanfield_linear_bsde(const LinearBsde& problem, const RegressionState& state,
                                             const BrownianEnsemble& noise,
                                             const BackwardOptions& options);

}  // namespace rmp
