#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rmp/coefficients.hpp"
#include "rmp/grid_paths.hpp"
#include "rmp/regression.hpp"

namespace rmp {

struct ThetaPoint {
  std::string label;
  double coord = 0.0;
};

// Finite parameter set with the metric |coord - coord'|.
class ThetaSpace {
 public:
  ThetaSpace() = default;
  explicit ThetaSpace(std::vector<ThetaPoint> points);

  std::size_t size() const { return points_.size(); }
  const ThetaPoint& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<ThetaPoint>& points() const { return points_; }
  double distance(std::size_t i, std::size_t j) const;
  std::size_t index_of(const std::string& label) const;

 private:
  std::vector<ThetaPoint> points_;
};

// Convex hull of probability vectors over a ThetaSpace.
class MeasurePolytope {
 public:
  MeasurePolytope() = default;
  MeasurePolytope(std::vector<std::vector<double>> vertices, std::size_t n_theta);

  std::size_t size() const { return vertices_.size(); }
  const std::vector<double>& vertex(std::size_t j) const { return vertices_[j]; }
  const std::vector<std::vector<double>>& vertices() const { return vertices_; }
  double pairing(std::size_t j, std::span<const double> values) const;

  static MeasurePolytope simplex(std::size_t n_theta);

 private:
  std::vector<std::vector<double>> vertices_;
};

// Box control set with Euclidean projection.
class ControlSpace {
 public:
  ControlSpace() = default;
  ControlSpace(std::vector<double> lower, std::vector<double> upper);

  std::size_t dim() const { return lower_.size(); }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  void project(std::span<double> v) const;
  bool contains(std::span<const double> v, double tol = 0.0) const;
  bool is_singleton() const;
  // Corners of the box (2^k points, flattened k-major).
  std::vector<double> corners() const;
  // Tensor grid with `per_axis` points per coordinate.
  std::vector<double> grid(std::size_t per_axis) const;

 private:
  std::vector<double> lower_, upper_;
};

// Piecewise-constant control on a grid, or a feedback map v(t, x).
class ControlProcess {
 public:
  using Feedback = std::function<void(double t, std::span<const double> x, std::span<double> v)>;

  ControlProcess() = default;
  ControlProcess(std::size_t n_steps, std::size_t dim, std::vector<double> values);
  static ControlProcess constant(std::size_t n_steps, std::span<const double> value);
  static ControlProcess feedback(std::size_t n_steps, std::size_t dim, Feedback map);

  std::size_t n_steps() const { return n_steps_; }
  std::size_t dim() const { return dim_; }
  bool is_feedback() const { return static_cast<bool>(map_); }
  std::span<const double> at(std::size_t step) const {
    return {values_.data() + step * dim_, dim_};
  }
  std::span<double> at(std::size_t step) { return {values_.data() + step * dim_, dim_}; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  void evaluate(std::size_t step, double t, std::span<const double> x,
                std::span<double> out) const;

  // this + lambda * (other - this), deterministic controls only.
  ControlProcess toward(const ControlProcess& other, double lambda) const;

 private:
  std::size_t n_steps_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> values_;
  Feedback map_;
};

// Declared bounds of the standing assumptions; validation only.
struct AssumptionConstants {
  double c0 = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
  double l1 = 1.0;
  double l2 = 1.0;
  std::optional<double> terminal_bound;  // sup |Phi|; absent for unbounded terminals
  double probe_radius = 3.0;
};

struct SolverSettings {
  double picard_tol = 1e-10;
  std::size_t picard_max = 50;
  std::optional<double> y_cap;  // explicit cap; otherwise twice the a-priori bound
  bool auto_cap = true;
  double blowup_cap = 1e12;
  double argmax_eps_rel = 1e-3;
  double argmax_se_mult = 3.0;  // noise allowance on vertex gaps, in standard errors
  double tol_mult = 3.0;        // MP residual tolerance, in standard errors
};

struct ScenarioSpec {
  std::string name;
  std::string family;
  std::string params_json;  // family parameters, canonical JSON text
  std::shared_ptr<const CoefficientSet> coefficients;
  ThetaSpace theta;
  MeasurePolytope polytope;
  ControlSpace controls;
  std::vector<double> x0;
  TimeGrid grid;
  std::size_t n_paths = 10000;
  std::uint64_t seed = 1;
  RegressionBasis basis;
  AssumptionConstants constants;
  SolverSettings solver;
  std::vector<double> initial_control;

  const CoefficientSet& coef() const { return *coefficients; }
  ControlProcess default_control() const;
  std::optional<double> y_cap() const;
};

struct AssumptionCheck {
  std::string name;
  bool passed = true;
  double worst_ratio = 0.0;  // lhs / rhs at the worst probe
  std::string witness;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;
  bool all_passed() const;
  const AssumptionCheck* first_failure() const;
};

// Parses a JSON scenario document or a built-in name. Missing sections are
// filled from the family defaults. Throws ConfigError on malformed input and
// ValidationError naming the violated assumption.
ScenarioSpec load_scenario(const std::string& config_or_name, bool validate = true);
ScenarioSpec load_scenario_file(const std::string& path, bool validate = true);
// Applies a JSON merge patch to the built-in defaults of `name`.
ScenarioSpec builtin_scenario(const std::string& name, const std::string& overrides_json = "{}",
                              bool validate = true);
std::string serialize(const ScenarioSpec& spec);
std::vector<std::string> builtin_names();

// Structural checks: probability vertices, metric, dimensions, bounded box.
void check_structure(const ScenarioSpec& spec);
AssumptionReport validate_assumptions(const ScenarioSpec& spec, std::size_t n_probes = 200,
                                      std::uint64_t seed = 12345);

// Bound on |Y| for a bounded terminal: with |f| <= 1.5 C1 + C1|y| + 1.5 C1|z|^2
// (from the declared C1), the exponential-transform comparison gives
// |Y| <= (|Phi|_inf + 1.5 C1 T) exp(C1 T). Infinite when no bound is declared.
double apriori_bound(const AssumptionConstants& k, double horizon);

}  // namespace rmp
