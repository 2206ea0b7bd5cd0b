#pragma once

#include <memory>
#include <span>
#include <vector>

#include "rmp/core.hpp"

namespace rmp {

// Polynomials of total degree <= degree in the state, plus each auxiliary
// feature times polynomials of degree <= aux_degree. The ensemble mean is
// constant across paths at a node and lives in the intercept.
struct RegressionBasis {
  int degree = 3;
  int aux_degree = 2;
  double ridge = 1e-8;  // relative to n_paths
};

struct RegressionFit {
  std::vector<double> coefficients;  // intercept first, then basis terms in order
  std::vector<double> fitted;
  double residual_rms = 0.0;
};

// Least-squares projection onto a basis evaluated on one node of an ensemble.
// Columns are standardized, constant columns dropped, and targets centered so
// the intercept is exact and sample means are preserved.
class Projector {
 public:
  Projector(std::span<const double> features, std::size_t width, std::size_t n_paths,
            const RegressionBasis& basis, std::span<const double> aux = {},
            std::size_t aux_width = 0);
  ~Projector();
  Projector(Projector&&) noexcept;
  Projector& operator=(Projector&&) noexcept;

  std::size_t n_paths() const;
  std::size_t n_terms() const;   // basis terms excluding the intercept
  std::size_t n_active() const;  // terms kept after dropping constants

  // fitted[p] = projection of target at path p. Strided access lets callers
  // project one component of an interleaved field.
  void project(std::span<const double> target, std::span<double> fitted,
               std::size_t stride = 1, std::size_t offset = 0) const;
  RegressionFit fit(std::span<const double> target) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

RegressionFit condexp_regress(std::span<const double> targets, std::span<const double> features,
                              std::size_t width, const RegressionBasis& basis);

}  // namespace rmp
