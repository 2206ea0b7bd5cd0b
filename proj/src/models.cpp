#include "rmp/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>

namespace rmp {

using nlohmann::json;

namespace {

double num(const json& p, const char* key) {
  auto it = p.find(key);
  if (it == p.end() || !it->is_number())
    throw ConfigError(std::string("missing or non-numeric parameter '") + key + "'");
  return it->get<double>();
}

void require_keys(const json& p, std::initializer_list<const char*> keys, const std::string& fam) {
  if (!p.is_object()) throw ConfigError("params of '" + fam + "' must be an object");
  for (auto it = p.begin(); it != p.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) throw ConfigError("unknown parameter '" + it.key() + "' for family '" + fam + "'");
  }
  for (const char* k : keys) num(p, k);
}

double theta_max(const ThetaSpace& th) {
  double m = 0.0;
  for (const auto& pt : th.points()) m = std::max(m, std::abs(pt.coord));
  return m;
}

double control_max(const ControlSpace& v) {
  double m = 0.0;
  for (std::size_t i = 0; i < v.dim(); ++i)
    m = std::max({m, std::abs(v.lower()[i]), std::abs(v.upper()[i])});
  return m;
}

double sech2(double x) {
  const double t = std::tanh(x);
  return 1.0 - t * t;
}

// ---------------------------------------------------------------- risk sensitive
//   b = (a0 + a1 th) x + a_mean x' + B v + eta sin x
//   sigma = s0 + s1 th + s_control v + s_x sin x
//   f = (kappa/2) z^2
//   Phi = level + amp th tanh x + cross tanh x'
//   phi = w x^2 / (1 + x^2),  gamma(y) = y
struct RiskSensitiveParams {
  double kappa, a0, a1, a_mean, b_control, eta, s0, s1, s_control, s_x, level, amp, cross, weight;
};

class RiskSensitive final : public CoefficientSet {
 public:
  explicit RiskSensitive(RiskSensitiveParams p) : CoefficientSet(1, 1, 1), p_(p) {}

  void drift(double th, const Point& a, std::span<double> out) const override {
    out[0] = (p_.a0 + p_.a1 * th) * a.x[0] + p_.a_mean * a.xm[0] + p_.b_control * a.v[0] +
             p_.eta * std::sin(a.x[0]);
  }
  void diffusion(double th, double, std::span<const double> x, std::span<const double> v,
                 std::span<double> out) const override {
    out[0] = p_.s0 + p_.s1 * th + p_.s_control * v[0] + p_.s_x * std::sin(x[0]);
  }
  double generator(double, const Point& a) const override { return 0.5 * p_.kappa * a.z[0] * a.z[0]; }
  double terminal(double th, std::span<const double> x, std::span<const double> xm) const override {
    return p_.level + p_.amp * th * std::tanh(x[0]) + p_.cross * std::tanh(xm[0]);
  }
  double terminal_cost(double, std::span<const double> x) const override {
    return p_.weight * x[0] * x[0] / (1.0 + x[0] * x[0]);
  }
  double initial_cost(double, double y) const override { return y; }

  void drift_dx(double th, const Point& a, std::span<double> out) const override {
    out[0] = p_.a0 + p_.a1 * th + p_.eta * std::cos(a.x[0]);
  }
  void drift_dxm(double, const Point&, std::span<double> out) const override { out[0] = p_.a_mean; }
  void drift_dv(double, const Point&, std::span<double> out) const override { out[0] = p_.b_control; }
  void diffusion_dx(double, double, std::span<const double> x, std::span<const double>,
                    std::span<double> out) const override {
    out[0] = p_.s_x * std::cos(x[0]);
  }
  void diffusion_dv(double, double, std::span<const double>, std::span<const double>,
                    std::span<double> out) const override {
    out[0] = p_.s_control;
  }
  void generator_dx(double, const Point&, std::span<double> out) const override { out[0] = 0.0; }
  void generator_dxm(double, const Point&, std::span<double> out) const override { out[0] = 0.0; }
  double generator_dy(double, const Point&) const override { return 0.0; }
  void generator_dz(double, const Point& a, std::span<double> out) const override {
    out[0] = p_.kappa * a.z[0];
  }
  void generator_dv(double, const Point&, std::span<double> out) const override { out[0] = 0.0; }
  void terminal_dx(double th, std::span<const double> x, std::span<const double>,
                   std::span<double> out) const override {
    out[0] = p_.amp * th * sech2(x[0]);
  }
  void terminal_dxm(double, std::span<const double>, std::span<const double> xm,
                    std::span<double> out) const override {
    out[0] = p_.cross * sech2(xm[0]);
  }
  void terminal_cost_dx(double, std::span<const double> x, std::span<double> out) const override {
    const double d = 1.0 + x[0] * x[0];
    out[0] = 2.0 * p_.weight * x[0] / (d * d);
  }
  double initial_cost_dy(double, double) const override { return 1.0; }
  bool analytic_partials() const override { return true; }

 private:
  RiskSensitiveParams p_;
};

RiskSensitiveParams rs_params(const std::string& text) {
  const json p = json::parse(text);
  require_keys(p, {"kappa", "a0", "a1", "a_mean", "b_control", "eta", "s0", "s1", "s_control",
                   "s_x", "level", "amp", "cross", "weight"},
               "risk_sensitive");
  return {num(p, "kappa"), num(p, "a0"),        num(p, "a1"),  num(p, "a_mean"), num(p, "b_control"),
          num(p, "eta"),   num(p, "s0"),        num(p, "s1"),  num(p, "s_control"), num(p, "s_x"),
          num(p, "level"), num(p, "amp"),       num(p, "cross"), num(p, "weight")};
}

AssumptionConstants rs_constants(const std::string& text, const ThetaSpace& th,
                                 const ControlSpace&, double R) {
  const auto p = rs_params(text);
  const double tm = theta_max(th);
  const double amax = std::abs(p.a0) + std::abs(p.a1) * tm;
  AssumptionConstants k;
  k.probe_radius = R;
  k.c0 = 1.01 * std::max({amax + std::abs(p.eta), std::abs(p.a_mean), std::abs(p.b_control),
                          std::abs(p.s_x), std::abs(p.s_control),
                          std::abs(p.b_control) + std::abs(p.s_control),
                          std::abs(p.s0) + std::abs(p.s1) * tm, 0.01});
  k.c1 = std::max(std::abs(p.kappa), 0.01);
  k.c2 = 1.01 * std::max({std::abs(p.a1) * R, std::abs(p.a1), std::abs(p.s1), std::abs(p.amp), 0.01});
  k.l1 = 1.01 * std::max(2.0 * std::abs(p.weight), 1.0);
  k.l2 = 0.01;
  k.terminal_bound = std::abs(p.level) + std::abs(p.amp) * tm + std::abs(p.cross);
  return k;
}

const char* rs_defaults = R"({
  "scenario": "risk_sensitive",
  "params": {"kappa": 1.0, "a0": 0.0, "a1": -0.2, "a_mean": 0.1, "b_control": 1.0, "eta": 0.2,
             "s0": 0.3, "s1": 0.1, "s_control": 0.2, "s_x": 0.1,
             "level": 0.5, "amp": 0.25, "cross": 0.1, "weight": 0.5},
  "theta": [{"label": "1", "coord": 1.0}, {"label": "2", "coord": 2.0}],
  "polytope": {"vertices": [[1.0, 0.0], [0.0, 1.0]]},
  "controls": {"lower": [-1.0], "upper": [1.0], "initial": [0.0]},
  "x0": [0.5],
  "grid": {"horizon": 1.0, "steps": 50},
  "monte_carlo": {"paths": 100000, "seed": 7},
  "regression": {"degree": 3, "aux_degree": 2, "ridge": 1e-8}
})";

// ---------------------------------------------------------------- large investor
// Reduced form with the strategy constrained to a cone [0, inf), truncated to
// [0, v_max]:
//   b = 0, sigma = vol
//   f = -|delta + v|^2 / (2 g_th) - (delta + v) z,   g_th = aversion0 + aversion1 th
//   Phi = claim0 + claim1 th + claim_slope tanh x,    phi = 0, gamma(y) = -y
//   delta = (mu - r + beta - alpha - vol^2 Gamma) / vol
struct LargeInvestorParams {
  double mu, r, beta, alpha, vol, zero_coupon_gamma, aversion0, aversion1, claim0, claim1,
      claim_slope;
  double delta() const { return (mu - r + beta - alpha - vol * vol * zero_coupon_gamma) / vol; }
};

class LargeInvestor final : public CoefficientSet {
 public:
  explicit LargeInvestor(LargeInvestorParams p) : CoefficientSet(1, 1, 1), p_(p), delta_(p.delta()) {}

  double aversion(double th) const { return p_.aversion0 + p_.aversion1 * th; }

  void drift(double, const Point&, std::span<double> out) const override { out[0] = 0.0; }
  void diffusion(double, double, std::span<const double>, std::span<const double>,
                 std::span<double> out) const override {
    out[0] = p_.vol;
  }
  double generator(double th, const Point& a) const override {
    const double u = delta_ + a.v[0];
    return -u * u / (2.0 * aversion(th)) - u * a.z[0];
  }
  double terminal(double th, std::span<const double> x, std::span<const double>) const override {
    return p_.claim0 + p_.claim1 * th + p_.claim_slope * std::tanh(x[0]);
  }
  double terminal_cost(double, std::span<const double>) const override { return 0.0; }
  double initial_cost(double, double y) const override { return -y; }

  void drift_dx(double, const Point&, std::span<double> out) const override { out[0] = 0.0; }
  void drift_dxm(double, const Point&, std::span<double> out) const override { out[0] = 0.0; }
  void drift_dv(double, const Point&, std::span<double> out) const override { out[0] = 0.0; }
  void diffusion_dx(double, double, std::span<const double>, std::span<const double>,
                    std::span<double> out) const override {
    out[0] = 0.0;
  }
  void diffusion_dv(double, double, std::span<const double>, std::span<const double>,
                    std::span<double> out) const override {
    out[0] = 0.0;
  }
  void generator_dx(double, const Point&, std::span<double> out) const override { out[0] = 0.0; }
  void generator_dxm(double, const Point&, std::span<double> out) const override { out[0] = 0.0; }
  double generator_dy(double, const Point&) const override { return 0.0; }
  void generator_dz(double, const Point& a, std::span<double> out) const override {
    out[0] = -(delta_ + a.v[0]);
  }
  void generator_dv(double th, const Point& a, std::span<double> out) const override {
    out[0] = -(delta_ + a.v[0]) / aversion(th) - a.z[0];
  }
  void terminal_dx(double, std::span<const double> x, std::span<const double>,
                   std::span<double> out) const override {
    out[0] = p_.claim_slope * sech2(x[0]);
  }
  void terminal_dxm(double, std::span<const double>, std::span<const double>,
                    std::span<double> out) const override {
    out[0] = 0.0;
  }
  void terminal_cost_dx(double, std::span<const double>, std::span<double> out) const override {
    out[0] = 0.0;
  }
  double initial_cost_dy(double, double) const override { return -1.0; }
  bool analytic_partials() const override { return true; }

 private:
  LargeInvestorParams p_;
  double delta_;
};

LargeInvestorParams li_params(const std::string& text) {
  const json p = json::parse(text);
  require_keys(p, {"mu", "r", "beta", "alpha", "vol", "zero_coupon_gamma", "aversion0", "aversion1",
                   "claim0", "claim1", "claim_slope"},
               "large_investor");
  LargeInvestorParams out{num(p, "mu"),        num(p, "r"),         num(p, "beta"),
                          num(p, "alpha"),     num(p, "vol"),       num(p, "zero_coupon_gamma"),
                          num(p, "aversion0"), num(p, "aversion1"), num(p, "claim0"),
                          num(p, "claim1"),    num(p, "claim_slope")};
  if (out.vol == 0.0) throw ConfigError("large_investor: vol must be nonzero");
  return out;
}

AssumptionConstants li_constants(const std::string& text, const ThetaSpace& th,
                                 const ControlSpace& v, double R) {
  const auto p = li_params(text);
  double gmin = INFINITY;
  for (const auto& pt : th.points()) gmin = std::min(gmin, p.aversion0 + p.aversion1 * pt.coord);
  if (!(gmin > 0.0)) throw ValidationError("large_investor: risk aversion must be positive on Theta");
  const double u = std::abs(p.delta()) + control_max(v);
  AssumptionConstants k;
  k.probe_radius = R;
  k.c0 = 1.01 * std::max(std::abs(p.vol), 0.01);
  k.c1 = 1.01 * std::max({u * u / (2.0 * gmin), u, u / gmin + R, 0.01});
  k.c2 = 1.01 * std::max({std::abs(p.claim1), u * u / 2.0 * std::abs(p.aversion1) / (gmin * gmin),
                          u * std::abs(p.aversion1) / (gmin * gmin), 0.01});
  k.l1 = 1.01;
  k.l2 = 0.01;
  k.terminal_bound = std::abs(p.claim0) + std::abs(p.claim1) * theta_max(th) + std::abs(p.claim_slope);
  return k;
}

const char* li_defaults = R"({
  "scenario": "large_investor",
  "params": {"mu": 0.08, "r": 0.02, "beta": 0.01, "alpha": 0.0, "vol": 0.2,
             "zero_coupon_gamma": 0.5, "aversion0": 1.0, "aversion1": 0.5,
             "claim0": 1.0, "claim1": 0.2, "claim_slope": 0.2},
  "theta": [{"label": "1", "coord": 1.0}, {"label": "2", "coord": 2.0}],
  "polytope": {"vertices": [[1.0, 0.0], [0.0, 1.0]]},
  "controls": {"lower": [0.0], "upper": [1.0], "initial": [0.0]},
  "x0": [0.0],
  "grid": {"horizon": 1.0, "steps": 50},
  "monte_carlo": {"paths": 100000, "seed": 7},
  "regression": {"degree": 3, "aux_degree": 2, "ridge": 1e-8}
})";

// ---------------------------------------------------------------- LQ robust
//   b = a x + a_mean x' + (B0 + B1 th) v,  sigma = s
//   f = alpha y + (beta0 + beta1 th) z + rho v^2 / 2 + c x
//   Phi = kappa x + kappa_mean x' + curvature x^2 / 2
//   phi = q x^2 / 2 + (l0 + l1 th) x,  gamma(y) = y
struct LqParams {
  double a, a_mean, B0, B1, s, alpha, beta0, beta1, rho, c, kappa, kappa_mean, curvature, q, l0, l1;
};

class LqRobust final : public CoefficientSet {
 public:
  explicit LqRobust(LqParams p) : CoefficientSet(1, 1, 1), p_(p) {}

  void drift(double th, const Point& at, std::span<double> out) const override {
    out[0] = p_.a * at.x[0] + p_.a_mean * at.xm[0] + (p_.B0 + p_.B1 * th) * at.v[0];
  }
  void diffusion(double, double, std::span<const double>, std::span<const double>,
                 std::span<double> out) const override {
    out[0] = p_.s;
  }
  double generator(double th, const Point& at) const override {
    return p_.alpha * at.y + (p_.beta0 + p_.beta1 * th) * at.z[0] + 0.5 * p_.rho * at.v[0] * at.v[0] +
           p_.c * at.x[0];
  }
  double terminal(double, std::span<const double> x, std::span<const double> xm) const override {
    return p_.kappa * x[0] + p_.kappa_mean * xm[0] + 0.5 * p_.curvature * x[0] * x[0];
  }
  double terminal_cost(double th, std::span<const double> x) const override {
    return 0.5 * p_.q * x[0] * x[0] + (p_.l0 + p_.l1 * th) * x[0];
  }
  double initial_cost(double, double y) const override { return y; }

  void drift_dx(double, const Point&, std::span<double> out) const override { out[0] = p_.a; }
  void drift_dxm(double, const Point&, std::span<double> out) const override { out[0] = p_.a_mean; }
  void drift_dv(double th, const Point&, std::span<double> out) const override {
    out[0] = p_.B0 + p_.B1 * th;
  }
  void diffusion_dx(double, double, std::span<const double>, std::span<const double>,
                    std::span<double> out) const override {
    out[0] = 0.0;
  }
  void diffusion_dv(double, double, std::span<const double>, std::span<const double>,
                    std::span<double> out) const override {
    out[0] = 0.0;
  }
  void generator_dx(double, const Point&, std::span<double> out) const override { out[0] = p_.c; }
  void generator_dxm(double, const Point&, std::span<double> out) const override { out[0] = 0.0; }
  double generator_dy(double, const Point&) const override { return p_.alpha; }
  void generator_dz(double th, const Point&, std::span<double> out) const override {
    out[0] = p_.beta0 + p_.beta1 * th;
  }
  void generator_dv(double, const Point& at, std::span<double> out) const override {
    out[0] = p_.rho * at.v[0];
  }
  void terminal_dx(double, std::span<const double> x, std::span<const double>,
                   std::span<double> out) const override {
    out[0] = p_.kappa + p_.curvature * x[0];
  }
  void terminal_dxm(double, std::span<const double>, std::span<const double>,
                    std::span<double> out) const override {
    out[0] = p_.kappa_mean;
  }
  void terminal_cost_dx(double th, std::span<const double> x, std::span<double> out) const override {
    out[0] = p_.q * x[0] + p_.l0 + p_.l1 * th;
  }
  double initial_cost_dy(double, double) const override { return 1.0; }
  bool analytic_partials() const override { return true; }

 private:
  LqParams p_;
};

LqParams lq_params(const std::string& text) {
  const json p = json::parse(text);
  require_keys(p, {"a", "a_mean", "B0", "B1", "s", "alpha", "beta0", "beta1", "rho", "c", "kappa",
                   "kappa_mean", "curvature", "q", "l0", "l1"},
               "lq_robust");
  return {num(p, "a"),     num(p, "a_mean"), num(p, "B0"),    num(p, "B1"),
          num(p, "s"),     num(p, "alpha"),  num(p, "beta0"), num(p, "beta1"),
          num(p, "rho"),   num(p, "c"),      num(p, "kappa"), num(p, "kappa_mean"),
          num(p, "curvature"), num(p, "q"),  num(p, "l0"),    num(p, "l1")};
}

AssumptionConstants lq_constants(const std::string& text, const ThetaSpace& th,
                                 const ControlSpace& v, double R) {
  const auto p = lq_params(text);
  const double tm = theta_max(th);
  const double vm = control_max(v);
  const double bmax = std::abs(p.B0) + std::abs(p.B1) * tm;
  const double betamax = std::abs(p.beta0) + std::abs(p.beta1) * tm;
  const double lmax = std::abs(p.l0) + std::abs(p.l1) * tm;
  AssumptionConstants k;
  k.probe_radius = R;
  k.c0 = 1.01 * std::max({std::abs(p.a), std::abs(p.a_mean), bmax, std::abs(p.s), 0.01});
  k.c1 = 1.01 * std::max({0.5 * std::abs(p.rho) * vm * vm + std::abs(p.c) * R, std::abs(p.alpha),
                          std::abs(p.c), betamax, std::abs(p.rho) * vm, 0.01});
  k.c2 = 1.01 * std::max({std::abs(p.B1) * vm, std::abs(p.B1), std::abs(p.beta1) * R,
                          std::abs(p.beta1), 0.01});
  k.l1 = 1.01 * std::max({std::abs(p.q), lmax, 1.0});
  k.l2 = 1.01 * std::max({std::abs(p.l1) * R, std::abs(p.l1), 0.01});
  // Bounded on the probe box only; the terminal is affine in the state.
  k.terminal_bound = (std::abs(p.kappa) + std::abs(p.kappa_mean)) * R + 0.5 * std::abs(p.curvature) * R * R;
  return k;
}

const char* lq_defaults = R"({
  "scenario": "lq_robust",
  "params": {"a": -0.2, "a_mean": 0.1, "B0": 1.0, "B1": 0.1, "s": 0.5,
             "alpha": 0.2, "beta0": 0.2, "beta1": 0.05, "rho": 1.0, "c": 0.2,
             "kappa": 0.5, "kappa_mean": 0.2, "curvature": 0.0,
             "q": 1.0, "l0": -1.5, "l1": 1.0},
  "theta": [{"label": "1", "coord": 1.0}, {"label": "2", "coord": 2.0}],
  "polytope": {"vertices": [[1.0, 0.0], [0.0, 1.0]]},
  "controls": {"lower": [-3.0], "upper": [3.0], "initial": [0.0]},
  "x0": [1.0],
  "grid": {"horizon": 1.0, "steps": 50},
  "monte_carlo": {"paths": 100000, "seed": 7},
  "regression": {"degree": 3, "aux_degree": 2, "ridge": 1e-8},
  "solver": {"y_cap": "none"}
})";

const std::map<std::string, ModelFamily>& registry() {
  static const std::map<std::string, ModelFamily> fams = [] {
    std::map<std::string, ModelFamily> m;
    m["risk_sensitive"] = ModelFamily{
        "risk_sensitive", rs_defaults,
        [](const std::string& t) -> std::shared_ptr<const CoefficientSet> {
          return std::make_shared<RiskSensitive>(rs_params(t));
        },
        rs_constants, true};
    m["large_investor"] = ModelFamily{
        "large_investor", li_defaults,
        [](const std::string& t) -> std::shared_ptr<const CoefficientSet> {
          return std::make_shared<LargeInvestor>(li_params(t));
        },
        li_constants, true};
    m["lq_robust"] = ModelFamily{
        "lq_robust", lq_defaults,
        [](const std::string& t) -> std::shared_ptr<const CoefficientSet> {
          return std::make_shared<LqRobust>(lq_params(t));
        },
        lq_constants, false};
    return m;
  }();
  return fams;
}

}  // namespace

const ModelFamily& find_family(const std::string& name) {
  const auto& reg = registry();
  auto it = reg.find(name);
  if (it == reg.end()) throw ConfigError("unknown scenario family '" + name + "'");
  return it->second;
}

std::vector<std::string> family_names() {
  std::vector<std::string> out;
  for (const auto& [k, _] : registry()) out.push_back(k);
  return out;
}

}  // namespace rmp
