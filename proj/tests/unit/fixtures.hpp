#pragma once

#include <functional>
#include <memory>

#include "rmp/scenario.hpp"

namespace rmp::testing {

// Scalar coefficient set assembled from closures; partials fall back to central differences.
struct Closures {
  std::function<double(double th, const Point&)> drift = [](double, const Point&) { return 0.0; };
  std::function<double(double th, double t, double x, double v)> diffusion = [](double, double, double, double) {
    return 0.0;
  };
  std::function<double(double th, const Point&)> generator = [](double, const Point&) { return 0.0; };
  std::function<double(double th, double x, double xm)> terminal = [](double, double, double) { return 0.0; };
  std::function<double(double th, double x)> terminal_cost = [](double, double) { return 0.0; };
  std::function<double(double th, double y)> initial_cost = [](double, double y) { return y; };
};

class ClosureCoefficients final : public CoefficientSet {
 public:
  explicit ClosureCoefficients(Closures c) : CoefficientSet(1, 1, 1), c_(std::move(c)) {}
  void drift(double th, const Point& at, std::span<double> out) const override { out[0] = c_.drift(th, at); }
  void diffusion(double th, double t, std::span<const double> x, std::span<const double> v,
                 std::span<double> out) const override {
    out[0] = c_.diffusion(th, t, x[0], v[0]);
  }
  double generator(double th, const Point& at) const override { return c_.generator(th, at); }
  double terminal(double th, std::span<const double> x, std::span<const double> xm) const override {
    return c_.terminal(th, x[0], xm[0]);
  }
  double terminal_cost(double th, std::span<const double> x) const override { return c_.terminal_cost(th, x[0]); }
  double initial_cost(double th, double y) const override { return c_.initial_cost(th, y); }

 private:
  Closures c_;
};

inline ScenarioSpec closure_spec(Closures c, std::size_t steps = 20, std::size_t paths = 4000,
                                 std::vector<double> thetas = {1.0}, double x0 = 0.0,
                                 double lo = -1.0, double hi = 1.0) {
  ScenarioSpec s;
  s.name = s.family = "closure";
  s.params_json = "{}";
  s.coefficients = std::make_shared<ClosureCoefficients>(std::move(c));
  std::vector<ThetaPoint> pts;
  for (double t : thetas) pts.push_back({std::to_string(static_cast<int>(t * 100)), t});
  s.theta = ThetaSpace(pts);
  s.polytope = MeasurePolytope::simplex(thetas.size());
  s.controls = ControlSpace({lo}, {hi});
  s.initial_control = {0.0};
  s.x0 = {x0};
  s.grid = make_grid(1.0, steps);
  s.n_paths = paths;
  s.seed = 5;
  s.solver.auto_cap = false;
  return s;
}

inline BrownianEnsemble noise_for(const ScenarioSpec& s) {
  return sample_brownian(s.grid, s.n_paths, s.coef().noise_dim(), s.seed);
}

inline ScenarioSpec small(const std::string& name, std::size_t paths = 5000, std::size_t steps = 20) {
  ScenarioSpec s = builtin_scenario(name);
  s.n_paths = paths;
  s.grid.n_steps = steps;
  return s;
}

}  // namespace rmp::testing
