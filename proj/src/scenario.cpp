#include "rmp/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>

#include "rmp/models.hpp"

namespace rmp {

using nlohmann::json;

// ---------------------------------------------------------------- Theta, Q, V

ThetaSpace::ThetaSpace(std::vector<ThetaPoint> points) : points_(std::move(points)) {}

double ThetaSpace::distance(std::size_t i, std::size_t j) const {
  return std::abs(points_.at(i).coord - points_.at(j).coord);
}

std::size_t ThetaSpace::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < points_.size(); ++i)
    if (points_[i].label == label) return i;
  throw ConfigError("unknown theta label '" + label + "'");
}

MeasurePolytope::MeasurePolytope(std::vector<std::vector<double>> vertices, std::size_t n_theta)
    : vertices_(std::move(vertices)) {
  if (vertices_.empty()) throw ValidationError("measure polytope needs at least one vertex");
  for (std::size_t j = 0; j < vertices_.size(); ++j) {
    const auto& v = vertices_[j];
    if (v.size() != n_theta)
      throw ValidationError("polytope vertex " + std::to_string(j) + " has " +
                            std::to_string(v.size()) + " weights for " + std::to_string(n_theta) +
                            " parameter points");
    double s = 0.0;
    for (double w : v) {
      if (!(w >= 0.0)) throw ValidationError("polytope vertex " + std::to_string(j) + " has a negative weight");
      s += w;
    }
    if (std::abs(s - 1.0) > 1e-12)
      throw ValidationError("polytope vertex " + std::to_string(j) + " sums to " +
                            std::to_string(s) + ", not 1");
  }
}

double MeasurePolytope::pairing(std::size_t j, std::span<const double> values) const {
  const auto& v = vertices_.at(j);
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * values[i];
  return s;
}

MeasurePolytope MeasurePolytope::simplex(std::size_t n_theta) {
  std::vector<std::vector<double>> vs(n_theta, std::vector<double>(n_theta, 0.0));
  for (std::size_t i = 0; i < n_theta; ++i) vs[i][i] = 1.0;
  return MeasurePolytope(std::move(vs), n_theta);
}

ControlSpace::ControlSpace(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size() || lower_.empty())
    throw ConfigError("control box bounds must be nonempty and of equal length");
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]))
      throw ConfigError("control box must be bounded");
    if (lower_[i] > upper_[i]) throw ConfigError("control box has lower > upper");
  }
}

void ControlSpace::project(std::span<double> v) const {
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::clamp(v[i], lower_[i], upper_[i]);
}

bool ControlSpace::contains(std::span<const double> v, double tol) const {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!(v[i] >= lower_[i] - tol && v[i] <= upper_[i] + tol)) return false;
  return true;
}

bool ControlSpace::is_singleton() const {
  for (std::size_t i = 0; i < lower_.size(); ++i)
    if (lower_[i] != upper_[i]) return false;
  return true;
}

std::vector<double> ControlSpace::corners() const {
  const std::size_t k = dim();
  std::vector<double> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask)
    for (std::size_t i = 0; i < k; ++i) out.push_back((mask >> i) & 1 ? upper_[i] : lower_[i]);
  return out;
}

std::vector<double> ControlSpace::grid(std::size_t per_axis) const {
  const std::size_t k = dim();
  per_axis = std::max<std::size_t>(per_axis, 2);
  std::size_t total = 1;
  for (std::size_t i = 0; i < k; ++i) total *= per_axis;
  std::vector<double> out;
  out.reserve(total * k);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t r = idx;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t a = r % per_axis;
      r /= per_axis;
      out.push_back(lower_[i] + (upper_[i] - lower_[i]) * static_cast<double>(a) /
                                    static_cast<double>(per_axis - 1));
    }
  }
  return out;
}

ControlProcess::ControlProcess(std::size_t n_steps, std::size_t dim, std::vector<double> values)
    : n_steps_(n_steps), dim_(dim), values_(std::move(values)) {
  if (values_.size() != n_steps_ * dim_)
    throw ConfigError("control has " + std::to_string(values_.size()) + " values, expected " +
                      std::to_string(n_steps_ * dim_));
}

ControlProcess ControlProcess::constant(std::size_t n_steps, std::span<const double> value) {
  std::vector<double> vals;
  vals.reserve(n_steps * value.size());
  for (std::size_t i = 0; i < n_steps; ++i) vals.insert(vals.end(), value.begin(), value.end());
  return ControlProcess(n_steps, value.size(), std::move(vals));
}

ControlProcess ControlProcess::feedback(std::size_t n_steps, std::size_t dim, Feedback map) {
  ControlProcess c(n_steps, dim, std::vector<double>(n_steps * dim, 0.0));
  c.map_ = std::move(map);
  return c;
}

void ControlProcess::evaluate(std::size_t step, double t, std::span<const double> x,
                              std::span<double> out) const {
  if (map_) {
    map_(t, x, out);
    return;
  }
  auto v = at(step);
  std::copy(v.begin(), v.end(), out.begin());
}

ControlProcess ControlProcess::toward(const ControlProcess& other, double lambda) const {
  if (is_feedback() || other.is_feedback())
    throw DomainError("control interpolation needs deterministic controls");
  if (other.n_steps_ != n_steps_ || other.dim_ != dim_)
    throw ConfigError("control shapes differ");
  std::vector<double> vals(values_.size());
  for (std::size_t i = 0; i < vals.size(); ++i)
    vals[i] = values_[i] + lambda * (other.values_[i] - values_[i]);
  return ControlProcess(n_steps_, dim_, std::move(vals));
}

ControlProcess ScenarioSpec::default_control() const {
  return ControlProcess::constant(grid.n_steps, initial_control);
}

std::optional<double> ScenarioSpec::y_cap() const {
  if (solver.y_cap) return solver.y_cap;
  if (solver.auto_cap && constants.terminal_bound) return 2.0 * apriori_bound(constants, grid.horizon);
  return std::nullopt;
}

double apriori_bound(const AssumptionConstants& k, double horizon) {
  if (!k.terminal_bound) return INFINITY;
  return (*k.terminal_bound + 1.5 * k.c1 * horizon) * std::exp(k.c1 * horizon);
}

bool AssumptionReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const AssumptionCheck* AssumptionReport::first_failure() const {
  for (const auto& c : checks)
    if (!c.passed) return &c;
  return nullptr;
}

// ---------------------------------------------------------------- config I/O

namespace {

std::vector<double> num_array(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : j) {
    if (!e.is_number()) throw ConfigError(what + " must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

double number(const json& j, const char* key, const std::string& section) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number())
    throw ConfigError("missing or non-numeric '" + section + "." + key + "'");
  return it->get<double>();
}

std::size_t count(const json& j, const char* key, const std::string& section) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_integer() || it->get<long long>() < 0)
    throw ConfigError("'" + section + "." + key + "' must be a nonnegative integer");
  return it->get<std::size_t>();
}

void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& section) {
  if (!j.is_object()) throw ConfigError("section '" + section + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : keys) ok = ok || it.key() == k;
    if (!ok) throw ConfigError("unknown key '" + it.key() + "' in section '" + section + "'");
  }
}

ScenarioSpec from_json(const json& user, bool validate) {
  if (!user.is_object()) throw ConfigError("scenario document must be a JSON object");
  only_keys(user, {"scenario", "name", "params", "theta", "polytope", "controls", "x0", "grid",
                   "monte_carlo", "regression", "constants", "solver"},
            "<root>");
  if (!user.contains("scenario") || !user["scenario"].is_string())
    throw ConfigError("scenario document needs a 'scenario' family name");
  const auto& fam = find_family(user["scenario"].get<std::string>());
  json doc = json::parse(fam.defaults_json);
  doc.merge_patch(user);

  ScenarioSpec spec;
  spec.family = fam.name;
  spec.name = doc.value("name", fam.name);

  spec.params_json = doc["params"].dump();
  spec.coefficients = fam.build(spec.params_json);
  const auto& coef = *spec.coefficients;

  std::vector<ThetaPoint> pts;
  if (!doc["theta"].is_array() || doc["theta"].empty())
    throw ConfigError("'theta' must be a nonempty array");
  for (const auto& e : doc["theta"]) {
    if (e.is_number()) {
      std::ostringstream os;
      os << e.get<double>();
      pts.push_back({os.str(), e.get<double>()});
    } else if (e.is_object()) {
      only_keys(e, {"label", "coord"}, "theta");
      if (!e.contains("label") || !e["label"].is_string())
        throw ConfigError("theta entries need a string 'label'");
      pts.push_back({e["label"].get<std::string>(), number(e, "coord", "theta")});
    } else {
      throw ConfigError("theta entries must be numbers or {label, coord} objects");
    }
  }
  spec.theta = ThetaSpace(std::move(pts));

  const json& poly = doc["polytope"];
  if (poly.is_string() && poly.get<std::string>() == "simplex") {
    spec.polytope = MeasurePolytope::simplex(spec.theta.size());
  } else {
    only_keys(poly, {"vertices"}, "polytope");
    std::vector<std::vector<double>> vs;
    if (!poly.contains("vertices") || !poly["vertices"].is_array())
      throw ConfigError("'polytope.vertices' must be an array");
    for (const auto& v : poly["vertices"]) vs.push_back(num_array(v, "polytope vertex"));
    spec.polytope = MeasurePolytope(std::move(vs), spec.theta.size());
  }

  const json& ctl = doc["controls"];
  only_keys(ctl, {"lower", "upper", "initial"}, "controls");
  spec.controls = ControlSpace(num_array(ctl["lower"], "controls.lower"),
                               num_array(ctl["upper"], "controls.upper"));
  spec.initial_control = ctl.contains("initial") ? num_array(ctl["initial"], "controls.initial")
                                                 : spec.controls.lower();

  spec.x0 = num_array(doc["x0"], "x0");

  only_keys(doc["grid"], {"horizon", "steps"}, "grid");
  spec.grid = make_grid(number(doc["grid"], "horizon", "grid"), count(doc["grid"], "steps", "grid"));

  only_keys(doc["monte_carlo"], {"paths", "seed"}, "monte_carlo");
  spec.n_paths = count(doc["monte_carlo"], "paths", "monte_carlo");
  {
    const auto& s = doc["monte_carlo"]["seed"];
    if (!s.is_number_integer()) throw ConfigError("'monte_carlo.seed' must be an integer");
    spec.seed = s.is_number_unsigned() ? s.get<std::uint64_t>()
                                       : static_cast<std::uint64_t>(s.get<std::int64_t>());
  }

  only_keys(doc["regression"], {"degree", "aux_degree", "ridge"}, "regression");
  spec.basis.degree = static_cast<int>(count(doc["regression"], "degree", "regression"));
  spec.basis.aux_degree = static_cast<int>(count(doc["regression"], "aux_degree", "regression"));
  spec.basis.ridge = number(doc["regression"], "ridge", "regression");

  const double radius = doc.contains("constants") && doc["constants"].contains("probe_radius")
                            ? number(doc["constants"], "probe_radius", "constants")
                            : 3.0;
  spec.constants = fam.constants(spec.params_json, spec.theta, spec.controls, radius);
  if (doc.contains("constants")) {
    const json& k = doc["constants"];
    only_keys(k, {"C0", "C1", "C2", "L1", "L2", "terminal_bound", "probe_radius"}, "constants");
    if (k.contains("C0")) spec.constants.c0 = number(k, "C0", "constants");
    if (k.contains("C1")) spec.constants.c1 = number(k, "C1", "constants");
    if (k.contains("C2")) spec.constants.c2 = number(k, "C2", "constants");
    if (k.contains("L1")) spec.constants.l1 = number(k, "L1", "constants");
    if (k.contains("L2")) spec.constants.l2 = number(k, "L2", "constants");
    if (k.contains("terminal_bound")) {
      if (k["terminal_bound"].is_null()) spec.constants.terminal_bound.reset();
      else spec.constants.terminal_bound = number(k, "terminal_bound", "constants");
    }
  }

  spec.solver.auto_cap = fam.bounded_terminal;
  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    only_keys(s, {"picard_tol", "picard_max", "y_cap", "blowup_cap", "argmax_eps_rel",
                  "argmax_se_mult", "tol_mult"},
              "solver");
    if (s.contains("picard_tol")) spec.solver.picard_tol = number(s, "picard_tol", "solver");
    if (s.contains("picard_max")) spec.solver.picard_max = count(s, "picard_max", "solver");
    if (s.contains("blowup_cap")) spec.solver.blowup_cap = number(s, "blowup_cap", "solver");
    if (s.contains("argmax_eps_rel")) spec.solver.argmax_eps_rel = number(s, "argmax_eps_rel", "solver");
    if (s.contains("argmax_se_mult")) spec.solver.argmax_se_mult = number(s, "argmax_se_mult", "solver");
    if (s.contains("tol_mult")) spec.solver.tol_mult = number(s, "tol_mult", "solver");
    if (s.contains("y_cap")) {
      const auto& c = s["y_cap"];
      if (c.is_number()) {
        spec.solver.y_cap = c.get<double>();
      } else if (c.is_string() && c.get<std::string>() == "none") {
        spec.solver.y_cap.reset();
        spec.solver.auto_cap = false;
      } else if (c.is_string() && c.get<std::string>() == "auto") {
        spec.solver.y_cap.reset();
        spec.solver.auto_cap = true;
      } else {
        throw ConfigError("'solver.y_cap' must be a number, \"auto\" or \"none\"");
      }
    }
  }

  (void)coef;
  check_structure(spec);
  if (validate) {
    const auto report = validate_assumptions(spec);
    if (const auto* f = report.first_failure())
      throw ValidationError(f->name + " violated at probe " + f->witness);
  }
  return spec;
}

json to_json(const ScenarioSpec& spec) {
  json doc;
  doc["scenario"] = spec.family;
  doc["name"] = spec.name;
  doc["params"] = json::parse(spec.params_json);
  doc["theta"] = json::array();
  for (const auto& p : spec.theta.points()) doc["theta"].push_back({{"label", p.label}, {"coord", p.coord}});
  doc["polytope"]["vertices"] = spec.polytope.vertices();
  doc["controls"] = {{"lower", spec.controls.lower()},
                     {"upper", spec.controls.upper()},
                     {"initial", spec.initial_control}};
  doc["x0"] = spec.x0;
  doc["grid"] = {{"horizon", spec.grid.horizon}, {"steps", spec.grid.n_steps}};
  doc["monte_carlo"] = {{"paths", spec.n_paths}, {"seed", spec.seed}};
  doc["regression"] = {{"degree", spec.basis.degree},
                       {"aux_degree", spec.basis.aux_degree},
                       {"ridge", spec.basis.ridge}};
  const auto& k = spec.constants;
  doc["constants"] = {{"C0", k.c0}, {"C1", k.c1}, {"C2", k.c2}, {"L1", k.l1}, {"L2", k.l2},
                      {"probe_radius", k.probe_radius}};
  doc["constants"]["terminal_bound"] = k.terminal_bound ? json(*k.terminal_bound) : json(nullptr);
  const auto& s = spec.solver;
  doc["solver"] = {{"picard_tol", s.picard_tol},         {"picard_max", s.picard_max},
                   {"blowup_cap", s.blowup_cap},         {"argmax_eps_rel", s.argmax_eps_rel},
                   {"argmax_se_mult", s.argmax_se_mult}, {"tol_mult", s.tol_mult}};
  if (s.y_cap) doc["solver"]["y_cap"] = *s.y_cap;
  else doc["solver"]["y_cap"] = s.auto_cap ? "auto" : "none";
  return doc;
}

}  // namespace

ScenarioSpec load_scenario(const std::string& config_or_name, bool validate) {
  const auto first = config_or_name.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && config_or_name[first] == '{') {
    json doc;
    try {
      doc = json::parse(config_or_name);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("cannot parse scenario: ") + e.what());
    }
    try {
      return from_json(doc, validate);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("bad scenario document: ") + e.what());
    }
  }
  return builtin_scenario(config_or_name, "{}", validate);
}

ScenarioSpec load_scenario_file(const std::string& path, bool validate) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_scenario(ss.str(), validate);
}

ScenarioSpec builtin_scenario(const std::string& name, const std::string& overrides_json,
                              bool validate) {
  const auto& fam = find_family(name);
  json doc = json::parse(fam.defaults_json);
  try {
    doc.merge_patch(json::parse(overrides_json));
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("cannot parse overrides: ") + e.what());
  }
  doc["scenario"] = name;
  try {
    return from_json(doc, validate);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad scenario document: ") + e.what());
  }
}

std::string serialize(const ScenarioSpec& spec) { return to_json(spec).dump(2); }

std::vector<std::string> builtin_names() { return family_names(); }

void check_structure(const ScenarioSpec& spec) {
  if (!spec.coefficients) throw ValidationError("scenario has no coefficients");
  const auto& c = *spec.coefficients;
  if (spec.theta.size() == 0) throw ValidationError("parameter set is empty");
  for (std::size_t i = 0; i < spec.theta.size(); ++i) {
    if (!std::isfinite(spec.theta[i].coord)) throw ValidationError("non-finite parameter coordinate");
    for (std::size_t j = i + 1; j < spec.theta.size(); ++j)
      if (spec.theta[i].label == spec.theta[j].label)
        throw ValidationError("duplicate parameter label '" + spec.theta[i].label + "'");
  }
  if (spec.polytope.size() == 0) throw ValidationError("measure polytope is empty");
  for (const auto& v : spec.polytope.vertices()) MeasurePolytope({v}, spec.theta.size());
  if (spec.x0.size() != c.state_dim())
    throw ValidationError("initial state has " + std::to_string(spec.x0.size()) +
                          " entries, state dimension is " + std::to_string(c.state_dim()));
  if (spec.controls.dim() != c.control_dim())
    throw ValidationError("control box dimension differs from the model's control dimension");
  if (spec.initial_control.size() != c.control_dim() || !spec.controls.contains(spec.initial_control))
    throw ValidationError("initial control must lie in the control box");
  if (spec.n_paths < 2) throw ValidationError("need at least two paths");
  if (spec.basis.ridge < 0.0) throw ValidationError("ridge must be nonnegative");
}

// ---------------------------------------------------------------- assumption probes

namespace {

struct Probe {
  std::size_t theta = 0;
  double t = 0.0;
  std::vector<double> x, xm, z, v;
  double y = 0.0;
  Point point() const { return Point{t, x, xm, y, z, v}; }
};

class Prober {
 public:
  Prober(const ScenarioSpec& s, std::uint64_t seed) : spec(s), rng(seed) {}

  double uni(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

  Probe draw() {
    const auto& c = spec.coef();
    const double R = spec.constants.probe_radius;
    Probe p;
    p.theta = std::uniform_int_distribution<std::size_t>(0, spec.theta.size() - 1)(rng);
    p.t = uni(0.0, spec.grid.horizon);
    p.x.resize(c.state_dim());
    p.xm.resize(c.state_dim());
    p.z.resize(c.noise_dim());
    p.v.resize(c.control_dim());
    for (auto& e : p.x) e = uni(-R, R);
    for (auto& e : p.xm) e = uni(-R, R);
    for (auto& e : p.z) e = uni(-R, R);
    for (std::size_t i = 0; i < p.v.size(); ++i)
      p.v[i] = spec.controls.lower()[i] == spec.controls.upper()[i]
                   ? spec.controls.lower()[i]
                   : uni(spec.controls.lower()[i], spec.controls.upper()[i]);
    p.y = uni(-R, R);
    return p;
  }

  std::vector<double> large_z() {
    const double top = std::log(1e3 * (1.0 + spec.constants.c1));
    std::vector<double> z(spec.coef().noise_dim());
    for (auto& e : z) {
      const double mag = std::exp(uni(std::log(1e-2), top));
      e = uni(0.0, 1.0) < 0.5 ? -mag : mag;
    }
    return z;
  }

  const ScenarioSpec& spec;
  std::mt19937_64 rng;
};

double norm(std::span<const double> a) {
  double s = 0.0;
  for (double e : a) s += e * e;
  return std::sqrt(s);
}

double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

std::string fmt_vec(std::span<const double> a) {
  std::ostringstream os;
  os.precision(6);
  os << "[";
  for (std::size_t i = 0; i < a.size(); ++i) os << (i ? "," : "") << a[i];
  os << "]";
  return os.str();
}

struct Tracker {
  AssumptionCheck check;
  explicit Tracker(std::string name) { check.name = std::move(name); }
  void observe(double lhs, double rhs, const std::function<std::string()>& witness) {
    const double ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? INFINITY : 0.0);
    const bool ok = lhs <= rhs * (1.0 + 1e-9) + 1e-12;
    if (ratio > check.worst_ratio || (!ok && check.passed)) {
      check.worst_ratio = std::max(check.worst_ratio, ratio);
      check.witness = witness();
    }
    if (!ok) check.passed = false;
  }
};

std::string describe(const ScenarioSpec& s, const Probe& p) {
  std::ostringstream os;
  os << "theta=" << s.theta[p.theta].label << " t=" << p.t << " x=" << fmt_vec(p.x)
     << " x'=" << fmt_vec(p.xm) << " y=" << p.y << " z=" << fmt_vec(p.z) << " v=" << fmt_vec(p.v);
  return os.str();
}

// Values and partials that the parameter-Lipschitz bound covers.
std::vector<double> coefficient_signature(const CoefficientSet& c, double th, const Probe& p) {
  const std::size_t n = c.state_dim(), d = c.noise_dim(), k = c.control_dim();
  const Point at = p.point();
  std::vector<double> out;
  auto add = [&](std::size_t len, const std::function<void(std::span<double>)>& fill) {
    const std::size_t off = out.size();
    out.resize(off + len);
    fill(std::span<double>(out).subspan(off, len));
  };
  add(n, [&](auto o) { c.drift(th, at, o); });
  add(n * d, [&](auto o) { c.diffusion(th, p.t, p.x, p.v, o); });
  out.push_back(c.generator(th, at));
  out.push_back(c.terminal(th, p.x, p.xm));
  add(n * n, [&](auto o) { c.drift_dx(th, at, o); });
  add(n * n, [&](auto o) { c.drift_dxm(th, at, o); });
  add(n * k, [&](auto o) { c.drift_dv(th, at, o); });
  add(d * n * n, [&](auto o) { c.diffusion_dx(th, p.t, p.x, p.v, o); });
  add(d * n * k, [&](auto o) { c.diffusion_dv(th, p.t, p.x, p.v, o); });
  add(n, [&](auto o) { c.generator_dx(th, at, o); });
  add(n, [&](auto o) { c.generator_dxm(th, at, o); });
  out.push_back(c.generator_dy(th, at));
  add(d, [&](auto o) { c.generator_dz(th, at, o); });
  add(k, [&](auto o) { c.generator_dv(th, at, o); });
  add(n, [&](auto o) { c.terminal_dx(th, p.x, p.xm, o); });
  add(n, [&](auto o) { c.terminal_dxm(th, p.x, p.xm, o); });
  return out;
}

void check_partials(const ScenarioSpec& spec, Prober& pr, std::size_t n_probes, AssumptionReport& rep) {
  const auto& c = spec.coef();
  Tracker tr("partials: analytic derivatives agree with central differences");
  if (!c.analytic_partials()) {
    tr.check.witness = "no analytic partials; central differences in use";
    rep.checks.push_back(tr.check);
    return;
  }
  const std::size_t n = c.state_dim(), d = c.noise_dim(), k = c.control_dim();
  auto scale_of = [](std::span<const double> coords) {
    double m = 0.0;
    for (double e : coords) m = std::max(m, std::abs(e));
    const double h = fd_step(m);
    return 10.0 * h * h;
  };
  for (std::size_t i = 0; i < n_probes; ++i) {
    Probe p = pr.draw();
    const double th = spec.theta[p.theta].coord;
    const Point at = p.point();
    auto compare = [&](const char* what, std::span<const double> an, std::span<const double> fd,
                       double value_scale, std::span<const double> coords) {
      const double tol = scale_of(coords);
      for (std::size_t j = 0; j < an.size(); ++j) {
        const double scale = std::max({1.0, std::abs(an[j]), std::abs(fd[j]), std::abs(value_scale)});
        tr.observe(std::abs(an[j] - fd[j]), tol * scale, [&] {
          std::ostringstream os;
          os << what << "[" << j << "] analytic=" << an[j] << " fd=" << fd[j] << " at "
             << describe(spec, p);
          return os.str();
        });
      }
    };
    std::vector<double> a(n * n * d + n * k * d + n * n + n * k + n + d + k + 4), f(a.size());
    auto sub = [](std::vector<double>& v, std::size_t len) { return std::span<double>(v).subspan(0, len); };
    std::vector<double> bval(n), sval(n * d);
    c.drift(th, at, bval);
    c.diffusion(th, p.t, p.x, p.v, sval);
    const double fval = c.generator(th, at);
    const double Phi = c.terminal(th, p.x, p.xm);
    const double bmax = bval.empty() ? 0.0 : std::abs(*std::max_element(bval.begin(), bval.end(), [](double u, double w) { return std::abs(u) < std::abs(w); }));
    const double smax = sval.empty() ? 0.0 : std::abs(*std::max_element(sval.begin(), sval.end(), [](double u, double w) { return std::abs(u) < std::abs(w); }));

    c.drift_dx(th, at, sub(a, n * n));
    c.CoefficientSet::drift_dx(th, at, sub(f, n * n));
    compare("db/dx", sub(a, n * n), sub(f, n * n), bmax, p.x);
    c.drift_dxm(th, at, sub(a, n * n));
    c.CoefficientSet::drift_dxm(th, at, sub(f, n * n));
    compare("db/dx'", sub(a, n * n), sub(f, n * n), bmax, p.xm);
    c.drift_dv(th, at, sub(a, n * k));
    c.CoefficientSet::drift_dv(th, at, sub(f, n * k));
    compare("db/dv", sub(a, n * k), sub(f, n * k), bmax, p.v);
    c.diffusion_dx(th, p.t, p.x, p.v, sub(a, d * n * n));
    c.CoefficientSet::diffusion_dx(th, p.t, p.x, p.v, sub(f, d * n * n));
    compare("dsigma/dx", sub(a, d * n * n), sub(f, d * n * n), smax, p.x);
    c.diffusion_dv(th, p.t, p.x, p.v, sub(a, d * n * k));
    c.CoefficientSet::diffusion_dv(th, p.t, p.x, p.v, sub(f, d * n * k));
    compare("dsigma/dv", sub(a, d * n * k), sub(f, d * n * k), smax, p.v);
    c.generator_dx(th, at, sub(a, n));
    c.CoefficientSet::generator_dx(th, at, sub(f, n));
    compare("df/dx", sub(a, n), sub(f, n), fval, p.x);
    c.generator_dxm(th, at, sub(a, n));
    c.CoefficientSet::generator_dxm(th, at, sub(f, n));
    compare("df/dx'", sub(a, n), sub(f, n), fval, p.xm);
    {
      const double an = c.generator_dy(th, at), fd = c.CoefficientSet::generator_dy(th, at);
      const double yy[1] = {p.y};
      compare("df/dy", std::span<const double>(&an, 1), std::span<const double>(&fd, 1), fval, yy);
    }
    c.generator_dz(th, at, sub(a, d));
    c.CoefficientSet::generator_dz(th, at, sub(f, d));
    compare("df/dz", sub(a, d), sub(f, d), fval, p.z);
    c.generator_dv(th, at, sub(a, k));
    c.CoefficientSet::generator_dv(th, at, sub(f, k));
    compare("df/dv", sub(a, k), sub(f, k), fval, p.v);
    c.terminal_dx(th, p.x, p.xm, sub(a, n));
    c.CoefficientSet::terminal_dx(th, p.x, p.xm, sub(f, n));
    compare("dPhi/dx", sub(a, n), sub(f, n), Phi, p.x);
    c.terminal_dxm(th, p.x, p.xm, sub(a, n));
    c.CoefficientSet::terminal_dxm(th, p.x, p.xm, sub(f, n));
    compare("dPhi/dx'", sub(a, n), sub(f, n), Phi, p.xm);
    c.terminal_cost_dx(th, p.x, sub(a, n));
    c.CoefficientSet::terminal_cost_dx(th, p.x, sub(f, n));
    compare("dphi/dx", sub(a, n), sub(f, n), c.terminal_cost(th, p.x), p.x);
    {
      const double an = c.initial_cost_dy(th, p.y), fd = c.CoefficientSet::initial_cost_dy(th, p.y);
      const double yy[1] = {p.y};
      compare("dgamma/dy", std::span<const double>(&an, 1), std::span<const double>(&fd, 1),
              c.initial_cost(th, p.y), yy);
    }
  }
  rep.checks.push_back(tr.check);
}

}  // namespace

AssumptionReport validate_assumptions(const ScenarioSpec& spec, std::size_t n_probes,
                                      std::uint64_t seed) {
  const auto& c = spec.coef();
  const auto& K = spec.constants;
  const std::size_t n = c.state_dim(), d = c.noise_dim(), k = c.control_dim();
  AssumptionReport rep;
  Prober pr(spec, seed);
  std::vector<double> b1(n), b2(n), s1(n * d), s2(n * d);

  Tracker growth("C0: growth of b and sigma at the origin");
  Tracker lip_b("C0: Lipschitz continuity of b in (x, x', v)");
  Tracker lip_s("C0: Lipschitz continuity of sigma in (x, v)");
  Tracker term("terminal bound: |Phi| within the declared bound");
  Tracker f0("C1: generator bound at y = 0, z = 0");
  Tracker lip_f("C1: Lipschitz continuity of f in (x, x', y)");
  Tracker quad("C1: quadratic growth of f in z");
  Tracker fv("C1: bound on df/dv");
  Tracker thl("C2: parameter-Lipschitz continuity of b, sigma, f, Phi and partials");
  Tracker phig("L1: growth of phi");
  Tracker phil("L1: Lipschitz continuity of dphi/dx");
  Tracker gaml("L1: Lipschitz continuity of gamma and dgamma/dy");
  Tracker l2("L2: parameter-Lipschitz continuity of phi, gamma and partials");

  const std::vector<double> zero_n(n, 0.0), zero_d(d, 0.0);
  for (std::size_t i = 0; i < n_probes; ++i) {
    Probe p = pr.draw();
    Probe q = pr.draw();
    q.theta = p.theta;
    q.t = p.t;
    const double th = spec.theta[p.theta].coord;
    const auto wit = [&] { return describe(spec, p) + " vs " + describe(spec, q); };

    {
      Point o{p.t, zero_n, zero_n, 0.0, zero_d, p.v};
      c.drift(th, o, b1);
      c.diffusion(th, p.t, zero_n, p.v, s1);
      growth.observe(norm(b1) + norm(s1), K.c0 * (1.0 + norm(p.v)), wit);
    }
    {
      c.drift(th, p.point(), b1);
      c.drift(th, q.point(), b2);
      lip_b.observe(dist(b1, b2), K.c0 * (dist(p.x, q.x) + dist(p.xm, q.xm) + dist(p.v, q.v)), wit);
      c.diffusion(th, p.t, p.x, p.v, s1);
      c.diffusion(th, p.t, q.x, q.v, s2);
      lip_s.observe(dist(s1, s2), K.c0 * (dist(p.x, q.x) + dist(p.v, q.v)), wit);
    }
    if (K.terminal_bound)
      term.observe(std::abs(c.terminal(th, p.x, p.xm)), *K.terminal_bound, wit);
    {
      Point o{p.t, p.x, p.xm, 0.0, zero_d, p.v};
      f0.observe(std::abs(c.generator(th, o)), K.c1, wit);
    }
    {
      Point a{p.t, p.x, p.xm, p.y, p.z, p.v};
      Point b{p.t, q.x, q.xm, q.y, p.z, p.v};
      lip_f.observe(std::abs(c.generator(th, a) - c.generator(th, b)),
                    K.c1 * (dist(p.x, q.x) + dist(p.xm, q.xm) + std::abs(p.y - q.y)), wit);
    }
    {
      const auto z1 = pr.large_z();
      const auto z2 = pr.large_z();
      Point a{p.t, p.x, p.xm, p.y, z1, p.v};
      Point b{p.t, p.x, p.xm, p.y, z2, p.v};
      quad.observe(std::abs(c.generator(th, a) - c.generator(th, b)),
                   K.c1 * (1.0 + norm(z1) + norm(z2)) * dist(z1, z2), [&] {
                     return describe(spec, p) + " z1=" + fmt_vec(z1) + " z2=" + fmt_vec(z2);
                   });
    }
    {
      std::vector<double> g(k);
      c.generator_dv(th, p.point(), g);
      fv.observe(norm(g), K.c1, wit);
    }
    for (std::size_t j = 0; j < spec.theta.size(); ++j) {
      if (j == p.theta) continue;
      const double dth = spec.theta.distance(p.theta, j);
      const auto sa = coefficient_signature(c, th, p);
      const auto sb = coefficient_signature(c, spec.theta[j].coord, p);
      double worst = 0.0;
      for (std::size_t e = 0; e < sa.size(); ++e) worst = std::max(worst, std::abs(sa[e] - sb[e]));
      thl.observe(worst, K.c2 * dth, [&] { return describe(spec, p) + " vs theta=" + spec.theta[j].label; });

      double w2 = std::abs(c.terminal_cost(th, p.x) - c.terminal_cost(spec.theta[j].coord, p.x));
      w2 = std::max(w2, std::abs(c.initial_cost(th, p.y) - c.initial_cost(spec.theta[j].coord, p.y)));
      w2 = std::max(w2, std::abs(c.initial_cost_dy(th, p.y) - c.initial_cost_dy(spec.theta[j].coord, p.y)));
      c.terminal_cost_dx(th, p.x, b1);
      c.terminal_cost_dx(spec.theta[j].coord, p.x, b2);
      w2 = std::max(w2, dist(b1, b2));
      l2.observe(w2, K.l2 * dth, [&] { return describe(spec, p) + " vs theta=" + spec.theta[j].label; });
    }
    {
      phig.observe(std::abs(c.terminal_cost(th, p.x) - c.terminal_cost(th, q.x)),
                   K.l1 * (1.0 + norm(p.x) + norm(q.x)) * dist(p.x, q.x), wit);
      c.terminal_cost_dx(th, p.x, b1);
      c.terminal_cost_dx(th, q.x, b2);
      phil.observe(dist(b1, b2), K.l1 * dist(p.x, q.x), wit);
      const double dy = std::abs(p.y - q.y);
      gaml.observe(std::max(std::abs(c.initial_cost(th, p.y) - c.initial_cost(th, q.y)),
                            std::abs(c.initial_cost_dy(th, p.y) - c.initial_cost_dy(th, q.y))),
                   K.l1 * dy, wit);
    }
  }
  for (auto* t : {&growth, &lip_b, &lip_s, &term, &f0, &lip_f, &quad, &fv, &thl, &phig, &phil, &gaml, &l2})
    rep.checks.push_back(t->check);
  if (!K.terminal_bound) rep.checks[3].witness = "no terminal bound declared";
  check_partials(spec, pr, std::max<std::size_t>(n_probes / 4, 10), rep);
  return rep;
}

}  // namespace rmp
