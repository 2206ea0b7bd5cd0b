#include "rmp/grid_paths.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace rmp {

std::vector<double> TimeGrid::nodes() const {
  std::vector<double> out(n_steps + 1);
  for (std::size_t i = 0; i <= n_steps; ++i) out[i] = time(i);
  return out;
}

TimeGrid make_grid(double horizon, std::size_t n_steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw ConfigError("grid horizon must be positive and finite, got " + std::to_string(horizon));
  if (n_steps == 0) throw ConfigError("grid needs at least one step");
  return TimeGrid{horizon, n_steps};
}

BrownianEnsemble::BrownianEnsemble(TimeGrid grid, std::size_t n_paths, std::size_t dim,
                                   std::uint64_t seed, PathField values)
    : grid_(grid), n_paths_(n_paths), dim_(dim), seed_(seed), values_(std::move(values)) {}

BrownianEnsemble BrownianEnsemble::coarsened() const {
  if (grid_.n_steps % 2 != 0)
    throw ConfigError("cannot coarsen a grid with an odd number of steps");
  TimeGrid coarse{grid_.horizon, grid_.n_steps / 2};
  PathField w(coarse.n_steps + 1, n_paths_, dim_);
  for (std::size_t i = 0; i <= coarse.n_steps; ++i) {
    auto src = values_.slice(2 * i);
    auto dst = w.slice(i);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return BrownianEnsemble(coarse, n_paths_, dim_, seed_, std::move(w));
}

namespace {

std::mt19937_64 path_stream(std::uint64_t seed, std::uint64_t path) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32),
                    0x9e3779b9u};
  return std::mt19937_64(seq);
}

}  // namespace

BrownianEnsemble sample_brownian(const TimeGrid& grid, std::size_t n_paths, std::size_t dim,
                                 std::uint64_t seed) {
  if (n_paths == 0) throw ConfigError("need at least one path");
  if (dim == 0) throw ConfigError("Brownian dimension must be at least 1");
  PathField w(grid.n_steps + 1, n_paths, dim);
  const double sd = std::sqrt(grid.dt());
  for (std::size_t path = 0; path < n_paths; ++path) {
    auto rng = path_stream(seed, path);
    std::normal_distribution<double> normal(0.0, sd);
    for (std::size_t i = 0; i < grid.n_steps; ++i)
      for (std::size_t c = 0; c < dim; ++c) w(i + 1, path, c) = w(i, path, c) + normal(rng);
  }
  return BrownianEnsemble(grid, n_paths, dim, seed, std::move(w));
}

double quadratic_variation(std::span<const double> path) {
  double s = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const double d = path[i] - path[i - 1];
    s += d * d;
  }
  return s;
}

}  // namespace rmp
