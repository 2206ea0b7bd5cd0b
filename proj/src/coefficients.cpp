#include "rmp/coefficients.hpp"

#include <cmath>
#include <vector>

namespace rmp {

namespace {

void require_finite(double v) {
  if (!std::isfinite(v)) throw NumericError("non-finite evaluation in finite difference");
}

// Central differences of an m-valued function of coords; out is m x coords.size().
template <class Eval>
void fd_jacobian(std::vector<double>& coords, std::size_t m, Eval&& eval, std::span<double> out) {
  const std::size_t nc = coords.size();
  std::vector<double> plus(m), minus(m);
  for (std::size_t j = 0; j < nc; ++j) {
    const double c0 = coords[j];
    const double h = fd_step(c0);
    coords[j] = c0 + h;
    const double up = coords[j];
    eval(std::span<double>(plus));
    coords[j] = c0 - h;
    const double down = coords[j];
    eval(std::span<double>(minus));
    coords[j] = c0;
    for (std::size_t i = 0; i < m; ++i) {
      require_finite(plus[i]);
      require_finite(minus[i]);
      out[i * nc + j] = (plus[i] - minus[i]) / (up - down);
    }
  }
}

std::vector<double> copy(std::span<const double> s) { return {s.begin(), s.end()}; }

}  // namespace

void CoefficientSet::drift_dx(double theta, const Point& at, std::span<double> out) const {
  auto x = copy(at.x);
  Point p = at;
  p.x = x;
  fd_jacobian(x, n_, [&](std::span<double> o) { drift(theta, p, o); }, out);
}

void CoefficientSet::drift_dxm(double theta, const Point& at, std::span<double> out) const {
  auto xm = copy(at.xm);
  Point p = at;
  p.xm = xm;
  fd_jacobian(xm, n_, [&](std::span<double> o) { drift(theta, p, o); }, out);
}

void CoefficientSet::drift_dv(double theta, const Point& at, std::span<double> out) const {
  auto v = copy(at.v);
  Point p = at;
  p.v = v;
  fd_jacobian(v, n_, [&](std::span<double> o) { drift(theta, p, o); }, out);
}

void CoefficientSet::diffusion_dx(double theta, double t, std::span<const double> x,
                                  std::span<const double> v, std::span<double> out) const {
  auto xs = copy(x);
  std::vector<double> jac(n_ * d_ * n_);
  fd_jacobian(xs, n_ * d_, [&](std::span<double> o) { diffusion(theta, t, xs, v, o); }, jac);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t c = 0; c < d_; ++c)
      for (std::size_t j = 0; j < n_; ++j) out[(c * n_ + i) * n_ + j] = jac[(i * d_ + c) * n_ + j];
}

void CoefficientSet::diffusion_dv(double theta, double t, std::span<const double> x,
                                  std::span<const double> v, std::span<double> out) const {
  auto vs = copy(v);
  std::vector<double> jac(n_ * d_ * k_);
  fd_jacobian(vs, n_ * d_, [&](std::span<double> o) { diffusion(theta, t, x, vs, o); }, jac);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t c = 0; c < d_; ++c)
      for (std::size_t j = 0; j < k_; ++j) out[(c * n_ + i) * k_ + j] = jac[(i * d_ + c) * k_ + j];
}

void CoefficientSet::generator_dx(double theta, const Point& at, std::span<double> out) const {
  auto x = copy(at.x);
  Point p = at;
  p.x = x;
  fd_jacobian(x, 1, [&](std::span<double> o) { o[0] = generator(theta, p); }, out);
}

void CoefficientSet::generator_dxm(double theta, const Point& at, std::span<double> out) const {
  auto xm = copy(at.xm);
  Point p = at;
  p.xm = xm;
  fd_jacobian(xm, 1, [&](std::span<double> o) { o[0] = generator(theta, p); }, out);
}

double CoefficientSet::generator_dy(double theta, const Point& at) const {
  std::vector<double> y{at.y};
  Point p = at;
  double out = 0.0;
  fd_jacobian(y, 1, [&](std::span<double> o) {
    p.y = y[0];
    o[0] = generator(theta, p);
  }, std::span<double>(&out, 1));
  return out;
}

void CoefficientSet::generator_dz(double theta, const Point& at, std::span<double> out) const {
  auto z = copy(at.z);
  Point p = at;
  p.z = z;
  fd_jacobian(z, 1, [&](std::span<double> o) { o[0] = generator(theta, p); }, out);
}

void CoefficientSet::generator_dv(double theta, const Point& at, std::span<double> out) const {
  auto v = copy(at.v);
  Point p = at;
  p.v = v;
  fd_jacobian(v, 1, [&](std::span<double> o) { o[0] = generator(theta, p); }, out);
}

void CoefficientSet::terminal_dx(double theta, std::span<const double> x,
                                 std::span<const double> xm, std::span<double> out) const {
  auto xs = copy(x);
  fd_jacobian(xs, 1, [&](std::span<double> o) { o[0] = terminal(theta, xs, xm); }, out);
}

void CoefficientSet::terminal_dxm(double theta, std::span<const double> x,
                                  std::span<const double> xm, std::span<double> out) const {
  auto ms = copy(xm);
  fd_jacobian(ms, 1, [&](std::span<double> o) { o[0] = terminal(theta, x, ms); }, out);
}

void CoefficientSet::terminal_cost_dx(double theta, std::span<const double> x,
                                      std::span<double> out) const {
  auto xs = copy(x);
  fd_jacobian(xs, 1, [&](std::span<double> o) { o[0] = terminal_cost(theta, xs); }, out);
}

double CoefficientSet::initial_cost_dy(double theta, double y) const {
  std::vector<double> ys{y};
  double out = 0.0;
  fd_jacobian(ys, 1, [&](std::span<double> o) { o[0] = initial_cost(theta, ys[0]); },
              std::span<double>(&out, 1));
  return out;
}

double finite_diff_partial(const std::function<double(std::span<const double>)>& fn,
                           std::span<const double> point, std::span<const double> direction,
                           double h) {
  if (!(h > 0.0)) throw NumericError("finite-difference step must be positive");
  std::vector<double> up(point.begin(), point.end()), down(up);
  for (std::size_t i = 0; i < up.size(); ++i) {
    up[i] += h * direction[i];
    down[i] -= h * direction[i];
  }
  const double fp = fn(up);
  const double fm = fn(down);
  require_finite(fp);
  require_finite(fm);
  return (fp - fm) / (2.0 * h);
}

double finite_diff_partial(const std::function<double(double)>& fn, double point, double h) {
  if (!(h > 0.0)) throw NumericError("finite-difference step must be positive");
  const double fp = fn(point + h);
  const double fm = fn(point - h);
  require_finite(fp);
  require_finite(fm);
  return (fp - fm) / (2.0 * h);
}

}  // namespace rmp
