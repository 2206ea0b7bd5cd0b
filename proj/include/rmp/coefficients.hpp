#pragma once

#include <functional>
#include <span>

#include "rmp/core.hpp"

namespace rmp {

// Arguments of the drift and generator: time, state, ensemble mean of the
// state, backward value, its integrand and the control.
struct Point {
  double t = 0.0;
  std::span<const double> x;
  std::span<const double> xm;
  double y = 0.0;
  std::span<const double> z;
  std::span<const double> v;
};

// Central-difference step used for every partial without an analytic form.
inline double fd_step(double coord) { return 1e-5 * (1.0 + std::abs(coord)); }

// Coefficients of the controlled mean-field forward-backward system indexed by a
// scalar parameter coordinate. Dimensions: state n, noise d, control k.
//
// Layouts (row-major):
//   diffusion        n x d, column c is the loading on the c-th Brownian motion
//   drift_dx, _dxm   n x n, [i*n + j] = d b_i / d x_j
//   drift_dv         n x k
//   diffusion_dx     d x n x n, [(c*n + i)*n + j] = d sigma_{ic} / d x_j
//   diffusion_dv     d x n x k
//
// The diffusion takes no mean argument: sigma may not depend on E[X].
// Every partial defaults to central differences with step fd_step().
class CoefficientSet {
 public:
  CoefficientSet(std::size_t n, std::size_t d, std::size_t k) : n_(n), d_(d), k_(k) {}
  virtual ~CoefficientSet() = default;

  std::size_t state_dim() const { return n_; }
  std::size_t noise_dim() const { return d_; }
  std::size_t control_dim() const { return k_; }

  virtual void drift(double theta, const Point& at, std::span<double> out) const = 0;
  virtual void diffusion(double theta, double t, std::span<const double> x,
                         std::span<const double> v, std::span<double> out) const = 0;
  virtual double generator(double theta, const Point& at) const = 0;
  virtual double terminal(double theta, std::span<const double> x,
                          std::span<const double> xm) const = 0;
  virtual double terminal_cost(double theta, std::span<const double> x) const = 0;
  virtual double initial_cost(double theta, double y) const = 0;

  virtual void drift_dx(double theta, const Point& at, std::span<double> out) const;
  virtual void drift_dxm(double theta, const Point& at, std::span<double> out) const;
  virtual void drift_dv(double theta, const Point& at, std::span<double> out) const;
  virtual void diffusion_dx(double theta, double t, std::span<const double> x,
                            std::span<const double> v, std::span<double> out) const;
  virtual void diffusion_dv(double theta, double t, std::span<const double> x,
                            std::span<const double> v, std::span<double> out) const;
  virtual void generator_dx(double theta, const Point& at, std::span<double> out) const;
  virtual void generator_dxm(double theta, const Point& at, std::span<double> out) const;
  virtual double generator_dy(double theta, const Point& at) const;
  virtual void generator_dz(double theta, const Point& at, std::span<double> out) const;
  virtual void generator_dv(double theta, const Point& at, std::span<double> out) const;
  virtual void terminal_dx(double theta, std::span<const double> x, std::span<const double> xm,
                           std::span<double> out) const;
  virtual void terminal_dxm(double theta, std::span<const double> x, std::span<const double> xm,
                            std::span<double> out) const;
  virtual void terminal_cost_dx(double theta, std::span<const double> x,
                                std::span<double> out) const;
  virtual double initial_cost_dy(double theta, double y) const;

  virtual bool analytic_partials() const { return false; }

 private:
  std::size_t n_, d_, k_;
};

// (F(p + h e) - F(p - h e)) / (2h) along direction e. Throws NumericError on a
// non-finite evaluation or a non-positive step.
double finite_diff_partial(const std::function<double(std::span<const double>)>& fn,
                           std::span<const double> point, std::span<const double> direction,
                           double h);
double finite_diff_partial(const std::function<double(double)>& fn, double point, double h);

}  // namespace rmp
