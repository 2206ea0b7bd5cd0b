#include "rmp/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rmp/core.hpp"

namespace rmp {

LpResult maximize_lp(const std::vector<double>& c, const std::vector<double>& a,
                     const std::vector<double>& b) {
  const std::size_t m = b.size(), n = c.size();
  if (a.size() != m * n) throw ConfigError("maximize_lp: constraint matrix has the wrong size");
  for (double e : b)
    if (!(e >= 0.0)) throw DomainError("maximize_lp: right-hand side must be nonnegative");
  const std::size_t w = n + m + 1;
  // rows 0..m-1 constraints, row m objective (reduced costs, negated)
  std::vector<double> t((m + 1) * w, 0.0);
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) t[i * w + j] = a[i * n + j];
    t[i * w + n + i] = 1.0;
    t[i * w + w - 1] = b[i];
    basis[i] = n + i;
  }
  for (std::size_t j = 0; j < n; ++j) t[m * w + j] = -c[j];
  const double eps = 1e-12;
  LpResult res;
  for (std::size_t iter = 0; iter < 10000; ++iter) {
    std::size_t enter = w;
    for (std::size_t j = 0; j + 1 < w; ++j)
      if (t[m * w + j] < -eps) {
        enter = j;
        break;
      }
    if (enter == w) break;
    std::size_t leave = m;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double col = t[i * w + enter];
      if (col > eps) {
        const double ratio = t[i * w + w - 1] / col;
        if (leave == m || ratio < best - eps || (std::abs(ratio - best) <= eps && basis[i] < basis[leave])) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave == m) {
      res.status = LpStatus::unbounded;
      return res;
    }
    const double piv = t[leave * w + enter];
    for (std::size_t j = 0; j < w; ++j) t[leave * w + j] /= piv;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = t[i * w + enter];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < w; ++j) t[i * w + j] -= f * t[leave * w + j];
    }
    basis[leave] = enter;
  }
  res.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < n) res.x[basis[i]] = t[i * w + w - 1];
  res.value = t[m * w + w - 1];
  return res;
}

GameSolution solve_matrix_game(const std::vector<double>& payoff, std::size_t rows,
                               std::size_t cols) {
  if (rows == 0 || cols == 0 || payoff.size() != rows * cols)
    throw ConfigError("solve_matrix_game: payoff matrix has the wrong size");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double e : payoff) {
    if (!std::isfinite(e)) throw NumericError("solve_matrix_game: non-finite payoff");
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  const double shift = 1.0 + (hi - lo) - lo;  // payoff + shift >= 1
  // variables: w_0..w_{rows-1}, t; max t s.t. t - sum w (payoff + shift) <= 0, sum w <= 1
  const std::size_t n = rows + 1, m = cols + 1;
  std::vector<double> c(n, 0.0), a(m * n, 0.0), b(m, 0.0);
  c[rows] = 1.0;
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i < rows; ++i) a[j * n + i] = -(payoff[i * cols + j] + shift);
    a[j * n + rows] = 1.0;
  }
  for (std::size_t i = 0; i < rows; ++i) a[cols * n + i] = 1.0;
  b[cols] = 1.0;
  const LpResult lp = maximize_lp(c, a, b);
  GameSolution g;
  g.weights.assign(lp.x.begin(), lp.x.begin() + static_cast<std::ptrdiff_t>(rows));
  const double total = std::accumulate(g.weights.begin(), g.weights.end(), 0.0);
  if (!(total > 0.0)) throw SolverError("solve_matrix_game: degenerate solution");
  for (double& e : g.weights) e /= total;
  g.value = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < cols; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows; ++i) s += g.weights[i] * payoff[i * cols + j];
    if (s < g.value) {
      g.value = s;
      g.worst_column = j;
    }
  }
  return g;
}

std::vector<double> project_to_simplex(std::span<const double> v) {
  if (v.empty()) return {};
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, tau = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cum += u[i];
    const double cand = (cum - 1.0) / static_cast<double>(i + 1);
    if (u[i] - cand > 0.0) tau = cand;
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(v[i] - tau, 0.0);
  return out;
}

}  // namespace rmp
