#pragma once

#include <vector>

#include "rmp/grid_paths.hpp"
#include "rmp/regression.hpp"

namespace rmp {

// (1 + p^-2 ln((2p - 1) / (2(p - 1))))^{1/2} - 1 for p > 1; decreasing to 0.
double psi(double p);

// Root of psi(p) = norm on (1, 1e12); +inf for norm = 0.
double p_m_from_norm(double norm);

double conjugate_exponent(double p);

// Reverse Hoelder constant 2 / (1 - (2p-2)/(2p-1) exp(p^2 (norm^2 + 2 norm))).
// Throws DomainError outside 1 < p < p_M(norm) or where the bracket is not positive.
double reverse_holder_K(double p, double norm);

// 1 / (1 - theta norm^2) for 0 < theta < norm^-2.
double john_nirenberg_bound(double theta, double norm);

struct BmoEstimate {
  double norm = 0.0;            // sqrt of max over nodes of the path maximum
  double norm_q999 = 0.0;       // same with the 99.9% path quantile
  double p_m = 0.0;
  double p_m_conjugate = 1.0;
  std::vector<double> node_sup;  // per node, max over paths of the fitted tail
};

// Grid-node estimator of the BMO norm of (integrand . W): regress the tail
// sum_{j >= i} |a_j|^2 dt on the features at node i. Stopping times are
// restricted to grid nodes, so this is an estimate from below.
BmoEstimate estimate_bmo_norm(const PathField& integrand, const PathField& features,
                              const TimeGrid& grid, const RegressionBasis& basis = {});

// log E(int a dW) at every node, accumulated in log space; integrand [step][path][d].
PathField doleans_dade_log(const PathField& integrand, const BrownianEnsemble& noise);
PathField doleans_dade(const PathField& integrand, const BrownianEnsemble& noise);

}  // namespace rmp
