#pragma once

#include <span>
#include <vector>

namespace rmp {

enum class LpStatus { optimal, unbounded };

struct LpResult {
  LpStatus status = LpStatus::optimal;
  std::vector<double> x;
  double value = 0.0;
};

// max c^T x subject to A x <= b, x >= 0, with b >= 0 so the origin is feasible.
// A is row-major (rows = b.size(), cols = c.size()). Dense tableau with Bland's rule.
LpResult maximize_lp(const std::vector<double>& c, const std::vector<double>& a,
                     const std::vector<double>& b);

struct GameSolution {
  std::vector<double> weights;  // over rows
  double value = 0.0;           // max_w min_col sum_row w_row payoff[row][col]
  std::size_t worst_column = 0;
};

// Row player's maximin mixed strategy for a payoff matrix [row * cols + col].
GameSolution solve_matrix_game(const std::vector<double>& payoff, std::size_t rows,
                               std::size_t cols);

// Euclidean projection onto the probability simplex.
std::vector<double> project_to_simplex(std::span<const double> v);

}  // namespace rmp
