#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rmp/core.hpp"

namespace rmp {

struct TimeGrid {
  double horizon = 1.0;
  std::size_t n_steps = 1;

  double dt() const { return horizon / static_cast<double>(n_steps); }
  // t_N is returned as the horizon itself.
  double time(std::size_t node) const {
    if (node >= n_steps) return horizon;
    return horizon * (static_cast<double>(node) / static_cast<double>(n_steps));
  }
  std::vector<double> nodes() const;
};

TimeGrid make_grid(double horizon, std::size_t n_steps);

// Brownian node values W(t_i) per path; W(0) = 0. Each path draws from its own
// generator keyed by (seed, path index), so any subset regenerates identically.
class BrownianEnsemble {
 public:
  BrownianEnsemble(TimeGrid grid, std::size_t n_paths, std::size_t dim, std::uint64_t seed,
                   PathField values);

  const TimeGrid& grid() const { return grid_; }
  std::size_t n_paths() const { return n_paths_; }
  std::size_t dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }
  const PathField& values() const { return values_; }

  double increment(std::size_t step, std::size_t path, std::size_t c) const {
    return values_(step + 1, path, c) - values_(step, path, c);
  }

  // Every other node of this ensemble; requires an even step count.
  BrownianEnsemble coarsened() const;

 private:
  TimeGrid grid_;
  std::size_t n_paths_;
  std::size_t dim_;
  std::uint64_t seed_;
  PathField values_;
};

BrownianEnsemble sample_brownian(const TimeGrid& grid, std::size_t n_paths, std::size_t dim,
                                 std::uint64_t seed);

// Sum of squared increments of a path sampled on grid nodes.
double quadratic_variation(std::span<const double> path);

}  // namespace rmp
