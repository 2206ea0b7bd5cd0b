// Acceptance criteria at desk scale. Prints one [PASS]/[FAIL] line per criterion.
// Usage: rmp_acceptance <path-to-rmp> <scratch-dir> [AC numbers...]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmp/optimizer.hpp"

using namespace rmp;
namespace fs = std::filesystem;

namespace {

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string g3(double a) { return fmt("%.3g", a); }

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back((ok ? "ok " : "FAILED ") + what);
  }
  void info(const std::string& what) { notes.push_back(what); }
};

ControlProcess sine_control(const ScenarioSpec& s, double center, double amp, double freq) {
  const double lo = s.controls.lower()[0], hi = s.controls.upper()[0];
  std::vector<double> v(s.grid.n_steps);
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = lo + (hi - lo) * (center + amp * std::sin(freq * static_cast<double>(i)));
  return ControlProcess(s.grid.n_steps, 1, v);
}

ControlProcess oracle_control() {
  const auto js = nlohmann::json::parse(std::ifstream(std::string(RMP_TEST_DATA) + "/lq_robust_oracle.json"));
  const auto v = js["control"].get<std::vector<double>>();
  return ControlProcess(v.size(), 1, v);
}

BrownianEnsemble noise_for(const ScenarioSpec& s, std::uint64_t seed) {
  return sample_brownian(s.grid, s.n_paths, s.coef().noise_dim(), seed);
}

// ---------------------------------------------------------------- AC1
Outcome ac1() {
  Outcome o;
  for (double kappa : {0.5, 1.0, 2.0}) {
    const ScenarioSpec s = builtin_scenario("risk_sensitive", R"({"params": {"kappa": )" + std::to_string(kappa) + "}}");
    const auto w = noise_for(s, s.seed);
    const StateSolution st = solve_state(s, 1.0, s.default_control(), w);
    const std::size_t N = s.grid.n_steps;
    double acc = 0.0;
    for (std::size_t p = 0; p < s.n_paths; ++p)
      acc += std::exp(kappa * s.coef().terminal(1.0, st.forward.x.row(N, p), st.forward.mean_at(N)));
    const double oracle = std::log(acc / static_cast<double>(s.n_paths)) / kappa;
    const double rel = std::abs(st.backward.y0() - oracle) / std::abs(oracle);
    o.check(rel <= 0.02, "kappa " + g3(kappa) + ": Y0 " + fmt("%.6f", st.backward.y0()) + " oracle " +
                             fmt("%.6f", oracle) + " rel " + g3(rel));
  }
  return o;
}

// ---------------------------------------------------------------- AC2
ControlProcess duality_direction(const ScenarioSpec& s) {
  std::vector<double> v(s.grid.n_steps);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.5 * std::sin(6.0 * s.grid.time(i)) + 0.3;
  return ControlProcess(s.grid.n_steps, 1, v);
}

double signed_gap(const DualityResult& d) { return (d.lhs - d.rhs) / (std::abs(d.lhs) + std::abs(d.rhs) + 1e-12); }

Outcome ac2() {
  Outcome o;
  for (const auto& [name, bound] : std::vector<std::pair<std::string, double>>{{"lq_robust", 0.05}, {"risk_sensitive", 0.10}}) {
    const ScenarioSpec s = builtin_scenario(name);
    const auto w = noise_for(s, s.seed);
    for (double th : {1.0, 2.0}) {
      const DualityResult d = duality_check(s, th, s.default_control(), duality_direction(s), w);
      o.check(d.gap <= bound, name + " theta " + g3(th) + ": lhs " + fmt("%.6f", d.lhs) + " rhs " +
                                  fmt("%.6f", d.rhs) + " gap " + g3(d.gap) + " <= " + g3(bound));
    }
  }
  // refinement on LQ: seed-averaged signed gap, N = 50 against N = 100 on common increments
  const ScenarioSpec base = builtin_scenario("lq_robust");
  double coarse = 0.0, fine = 0.0;
  int count = 0;
  for (std::uint64_t seed : {7u, 8u, 9u}) {
    const auto w200 = sample_brownian(TimeGrid{base.grid.horizon, 200}, base.n_paths, 1, seed);
    const auto w100 = w200.coarsened();
    const auto w50 = w100.coarsened();
    for (double th : {1.0, 2.0}) {
      ScenarioSpec s = base;
      s.grid = w50.grid();
      const double g50 = signed_gap(duality_check(s, th, s.default_control(), duality_direction(s), w50));
      s.grid = w100.grid();
      const double g100 = signed_gap(duality_check(s, th, s.default_control(), duality_direction(s), w100));
      o.info("seed " + std::to_string(seed) + " theta " + g3(th) + ": signed gap N=50 " + g3(g50) + ", N=100 " + g3(g100));
      coarse += g50;
      fine += g100;
      ++count;
    }
  }
  coarse /= count;
  fine /= count;
  o.check(std::abs(fine) < std::abs(coarse),
          "LQ refinement: mean signed gap " + g3(coarse) + " (N=50) -> " + g3(fine) + " (N=100)");
  return o;
}

// ---------------------------------------------------------------- AC3
Outcome ac3() {
  Outcome o;
  const ScenarioSpec base = builtin_scenario("risk_sensitive");
  const std::size_t P = 20000;
  std::vector<BrownianEnsemble> ws{sample_brownian(TimeGrid{base.grid.horizon, 200}, P, 1, 11)};
  for (int i = 0; i < 3; ++i) ws.push_back(ws.back().coarsened());
  double prev = 0.0;
  for (auto it = ws.rbegin(); it != ws.rend(); ++it) {
    ScenarioSpec s = base;
    s.grid = it->grid();
    const std::size_t N = s.grid.n_steps;
    const std::vector<double> c{0.5};
    const StateSolution st = solve_state(s, 1.0, ControlProcess::constant(N, c), *it);
    const PathField closed = solve_adjoint_p(s, st, *it), euler = solve_adjoint_p_euler(s, st, *it);
    double ms = 0.0;
    for (std::size_t p = 0; p < P; ++p) ms += std::pow(closed(N, p) - euler(N, p), 2);
    const double rms = std::sqrt(ms / static_cast<double>(P));
    if (prev > 0.0) {
      const double ratio = prev / rms;
      o.check(ratio >= 1.2 && ratio <= 1.8, "N " + std::to_string(N) + ": RMS " + g3(rms) + ", ratio " + fmt("%.3f", ratio));
    } else {
      o.info("N " + std::to_string(N) + ": RMS " + g3(rms));
    }
    prev = rms;
  }
  return o;
}

// ---------------------------------------------------------------- AC4
const std::vector<double> kLambdas{0.2, 0.1, 0.05, 0.025};

bool decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

ControlProcess ac4_direction(const ScenarioSpec& s) {
  std::vector<double> v(s.grid.n_steps);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.5 * std::sin(0.2 * static_cast<double>(i)) + 0.3;
  return ControlProcess(s.grid.n_steps, 1, v);
}

// sup over parameters of the delta norms per lambda on the LQ family; with
// subtract_remainder, dY - lambda R is used where R is the exact quadratic remainder.
struct LqSweep {
  std::vector<DeltaNorms> norms;
  double noise = 0.0;
};

LqSweep lq_sweep(const ScenarioSpec& s, double p, bool subtract_remainder) {
  const auto w = noise_for(s, s.seed);
  const ControlProcess vbar = s.default_control(), v = ac4_direction(s);
  const auto params = nlohmann::json::parse(s.params_json);
  const double rho = params["rho"].get<double>(), alpha = params["alpha"].get<double>();
  const std::size_t N = s.grid.n_steps;
  const double dt = s.grid.dt();
  std::vector<double> rem(N + 1, 0.0);
  for (std::size_t i = N; i-- > 0;) {
    const double dv = v.at(i)[0] - vbar.at(i)[0];
    rem[i] = (rem[i + 1] + 0.5 * rho * dv * dv * dt) / (1.0 - alpha * dt);
  }
  LqSweep out;
  out.norms.assign(kLambdas.size(), DeltaNorms{});
  for (double th : {1.0, 2.0}) {
    const StateSolution st = solve_state(s, th, vbar, w);
    out.noise = std::max(out.noise, std::pow(st.backward.y0_estimate().se, p));
    const VariationalSolution var = solve_variational(s, st, v, w);
    const PathField weight = doleans_dade(z_sensitivity(s, st), w);
    for (std::size_t k = 0; k < kLambdas.size(); ++k) {
      DeltaProcesses d = delta_processes(s, st, var, v, kLambdas[k], w);
      if (subtract_remainder)
        for (std::size_t i = 0; i <= N; ++i)
          for (std::size_t path = 0; path < s.n_paths; ++path) d.dy(i, path) -= kLambdas[k] * rem[i];
      const DeltaNorms n = delta_norms(d, weight, p, s.grid);
      out.norms[k].x = std::max(out.norms[k].x, n.x);
      out.norms[k].y = std::max(out.norms[k].y, n.y);
      out.norms[k].z = std::max(out.norms[k].z, n.z);
    }
  }
  return out;
}

Outcome ac4() {
  Outcome o;
  const double p = 1.8;
  {
    const ScenarioSpec s = builtin_scenario("risk_sensitive");
    const auto w = noise_for(s, s.seed);
    const DeltaDiagnostics dd = convergence_sweep(s, {1.0, 2.0}, s.default_control(), ac4_direction(s), kLambdas, p, w);
    std::vector<double> x, y, z;
    for (const auto& n : dd.norms) {
      x.push_back(n.x);
      y.push_back(n.y);
      z.push_back(n.z);
    }
    o.info("risk_sensitive p_M " + g3(dd.p_m) + ", band (" + g3(dd.band_low) + ", " + g3(dd.band_high) + ")");
    const std::vector<std::pair<std::string, std::pair<std::vector<double>*, double>>> rows{
        {"dX", {&x, dd.slope_x}}, {"dY", {&y, dd.slope_y}}, {"dZ", {&z, dd.slope_z}}};
    for (const auto& [label, data] : rows) {
      std::string vals;
      for (double e : *data.first) vals += g3(e) + " ";
      o.check(decreasing(*data.first) && data.second >= 0.7,
              "risk_sensitive " + label + " norms " + vals + "slope " + fmt("%.3f", data.second));
    }
  }
  auto at_noise = [&](const LqSweep& sw, const std::string& label, bool with_y) {
    bool ok = true;
    std::string vals;
    for (const auto& n : sw.norms) {
      ok = ok && n.x <= sw.noise && n.z <= sw.noise && (!with_y || n.y <= sw.noise);
      vals += "(" + g3(n.x) + ", " + g3(n.y) + ", " + g3(n.z) + ") ";
    }
    o.check(ok, label + " norms (dX, dY, dZ) " + vals + "noise level " + g3(sw.noise));
  };
  const ScenarioSpec lq = builtin_scenario("lq_robust");
  const LqSweep raw = lq_sweep(lq, p, false);
  std::string ys;
  for (const auto& n : raw.norms) ys += g3(n.y) + " ";
  o.info("lq_robust raw dY norms " + ys + "(deterministic quadratic remainder)");
  at_noise(lq_sweep(lq, p, true), "lq_robust with dY - lambda R", true);
  at_noise(lq_sweep(builtin_scenario("lq_robust", R"({"params": {"rho": 0.0}})"), p, false), "lq_robust rho=0", true);
  return o;
}

// ---------------------------------------------------------------- AC5
Outcome ac5() {
  Outcome o;
  for (const std::string name : {"risk_sensitive", "lq_robust"}) {
    const ScenarioSpec s = builtin_scenario(name);
    const auto w = noise_for(s, s.seed);
    const ControlProcess vbar = s.default_control(), v = sine_control(s, 0.5, 0.3, 0.15);
    const RobustState base = evaluate_states(s, vbar, w);
    const DerivativeResult der = variational_derivative(s, base, v, w);
    auto quotient = [&](double lam) { return (evaluate_J(s, vbar.toward(v, lam), w).value - base.eval.value) / lam; };
    const double q1 = quotient(0.05), q2 = quotient(0.025);
    const double rich = 2.0 * q2 - q1;
    const double rel = std::abs(rich - der.value) / std::abs(der.value);
    o.check(rel <= 0.05, name + ": analytic " + fmt("%.6f", der.value) + " quotients " + fmt("%.6f", q1) + ", " +
                             fmt("%.6f", q2) + " extrapolated " + fmt("%.6f", rich) + " rel " + g3(rel));
  }
  return o;
}

// ---------------------------------------------------------------- AC6
Outcome ac6() {
  Outcome o;
  double worst = 0.0;
  for (double p : {1.1, 1.5, 2.0, 5.0, 50.0}) worst = std::max(worst, std::abs(p_m_from_norm(psi(p)) - p));
  o.check(worst <= 1e-8, "p_M(psi(p)) round trip at 5 points, worst error " + g3(worst));
  const double k2 = reverse_holder_K(2.0, 0.0), k11 = reverse_holder_K(1.1, 0.0);
  o.check(k2 == 6.0, "K(2, 0) = " + fmt("%.17g", k2));
  // 1.1 and 2.4 are not representable; exact means the correctly rounded value up to one ulp
  o.check(std::abs(k11 - 2.4) <= std::nextafter(2.4, 3.0) - 2.4, "K(1.1, 0) = " + fmt("%.17g", k11));
  bool jn = true;
  for (double norm : {0.1, 0.37, 1.0, 2.5, 7.0}) jn = jn && john_nirenberg_bound(0.5 / (norm * norm), norm) == 2.0;
  o.check(jn, "John-Nirenberg bound at theta = 1/(2 norm^2) equals 2 for 5 norms");

  const TimeGrid g = make_grid(1.0, 50);
  const std::size_t P = 100000;
  const auto w = sample_brownian(g, P, 1, 7);
  PathField feat(51, P, 1), alpha(51, P, 1, 0.8);
  for (std::size_t i = 0; i <= 50; ++i)
    for (std::size_t p = 0; p < P; ++p) feat(i, p) = w.values()(i, p);
  const BmoEstimate e = estimate_bmo_norm(alpha, feat, g);
  const double rel = std::abs(e.norm - 0.8) / 0.8;
  o.check(rel <= 0.05, "BMO norm of constant 0.8: " + fmt("%.6f", e.norm) + " rel " + g3(rel));
  const PathField dd = doleans_dade(alpha, w);
  std::vector<double> terminal(P);
  for (std::size_t p = 0; p < P; ++p) terminal[p] = dd(50, p);
  const MeanAndError m = sample_mean(terminal);
  o.check(std::abs(m.mean - 1.0) <= 3.0 * m.se,
          "E[exp(0.8 W - 0.32)] = " + fmt("%.5f", m.mean) + " +- " + g3(m.se));
  return o;
}

// ---------------------------------------------------------------- AC7
Outcome ac7() {
  Outcome o;
  const ScenarioSpec s = builtin_scenario("lq_robust");
  const auto w = noise_for(s, s.seed);
  const ControlProcess vopt = oracle_control();

  const OptimizationTrace tr = robust_descent(s, s.default_control(), w);
  double worst = 0.0;
  for (std::size_t i = 0; i < s.grid.n_steps; ++i)
    worst = std::max(worst, std::abs(tr.final_control().at(i)[0] - vopt.at(i)[0]) / std::abs(vopt.at(i)[0]));
  o.check(worst <= 0.02 && tr.accepted_steps() <= 50,
          "descent: " + std::to_string(tr.accepted_steps()) + " iterations (" + tr.stop_reason + "), J " +
              fmt("%.6f", tr.values.back()) + ", worst relative deviation from oracle " + g3(worst));

  const MpResidualReport at_opt = mp_residual(s, vopt, w);
  o.check(at_opt.min_residual >= -at_opt.tol,
          "residual at oracle " + g3(at_opt.min_residual) + " >= -" + g3(at_opt.tol));

  ControlProcess bumped = vopt;
  bumped.at(20)[0] += 0.3;
  const MpResidualReport at_bump = mp_residual(s, bumped, w);
  o.check(at_bump.min_residual < -at_bump.tol,
          "residual at perturbed control " + g3(at_bump.min_residual) + " < -" + g3(at_bump.tol) + ", " +
              std::to_string(at_bump.flagged.size()) + " steps flagged");
  const auto probes = make_probes(s, bumped, 8, 3, &at_bump.direction);
  const QBarResult qb = find_Q_bar(s, bumped, probes, w);
  o.check(!qb.feasible && qb.certificate_value < -qb.tol,
          "find_Q_bar at perturbed control: value " + g3(qb.value) + ", certificate " + g3(qb.certificate_value) +
              ", tol " + g3(qb.tol));
  return o;
}

// ---------------------------------------------------------------- AC8
Outcome ac8() {
  Outcome o;
  const ScenarioSpec s = builtin_scenario("lq_robust");
  const auto w = noise_for(s, s.seed);
  const ControlProcess vopt = oracle_control();
  const MpResidualReport res = mp_residual(s, vopt, w);
  const auto all = make_probes(s, vopt, 8, 5);
  const std::vector<ControlProcess> random(all.end() - 8, all.end());
  const AuditReport a = sufficiency_audit(s, vopt, res.q_bar, random, {0.1, 0.5, 1.0}, w);
  for (const auto& h : a.hypotheses) o.check(h.passed, "hypothesis " + h.name + ", worst excess " + g3(h.worst_excess));
  double worst = INFINITY;
  for (const auto& pc : a.probes) worst = std::min(worst, pc.difference / pc.se);
  o.check(a.probes_pass && a.probes.size() == 24,
          std::to_string(a.probes.size()) + " probe comparisons, smallest (J(v) - J(vbar)) / SE " + g3(worst));

  const ScenarioSpec convex = builtin_scenario("lq_robust", R"({"params": {"curvature": 0.5}})");
  const AuditReport b = sufficiency_audit(convex, vopt, res.q_bar, {}, {}, w);
  bool flagged = false;
  for (const auto& h : b.hypotheses)
    if (h.name.rfind("Phi concave", 0) == 0) flagged = !h.passed;
  o.check(flagged && b.verdict != "optimal", "strictly convex Phi flagged, verdict " + b.verdict);
  return o;
}

// ---------------------------------------------------------------- AC9
Outcome ac9() {
  Outcome o;
  for (const std::string name : {"risk_sensitive", "lq_robust", "large_investor"}) {
    const ScenarioSpec s = builtin_scenario(name);
    const auto w = noise_for(s, s.seed);
    const double lo = s.controls.lower()[0], hi = s.controls.upper()[0];
    const std::vector<double> mid{0.5 * (lo + hi) + 0.25 * (hi - lo)};
    const ControlProcess vbar = ControlProcess::constant(s.grid.n_steps, mid);
    const ControlProcess v = sine_control(s, 0.5, 0.3, 0.15);
    ThetaGaps wide, narrow;
    try {
      wide = theta_continuity_probe(s, 1.0, 1.1, vbar, v, 1.9, w);
      narrow = theta_continuity_probe(s, 1.0, 1.05, vbar, v, 1.9, w);
    } catch (const DomainError& e) {
      if (name != "large_investor") throw;
      o.info("large_investor not probed: " + std::string(e.what()));
      continue;
    }
    const std::vector<std::pair<std::string, std::pair<double, double>>> rows{
        {"X", {wide.x, narrow.x}},   {"Y", {wide.y, narrow.y}}, {"X1", {wide.x1, narrow.x1}},
        {"Y1", {wide.y1, narrow.y1}}, {"p", {wide.p, narrow.p}}, {"q", {wide.q, narrow.q}}};
    for (const auto& [label, g] : rows) {
      const double ratio = g.first / g.second;
      o.check(ratio >= 1.5, name + " " + label + ": gaps " + g3(g.first) + " -> " + g3(g.second) + ", ratio " +
                                fmt("%.2f", ratio));
    }
  }
  return o;
}

// ---------------------------------------------------------------- AC10
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = slurp(e.path());
  return out;
}

Outcome ac10(const std::string& cli, const fs::path& scratch) {
  Outcome o;
  const std::vector<std::pair<std::string, std::string>> runs{
      {"validate", "--scenario risk_sensitive --probes 50"},
      {"simulate", "--scenario large_investor --paths 2000 --steps 10"},
      {"bmo", "--scenario risk_sensitive --paths 2000 --steps 10"},
      {"variation", "--scenario risk_sensitive --paths 2000 --steps 10"},
      {"duality", "--scenario lq_robust --paths 2000 --steps 10"},
      {"evaluate", "--scenario lq_robust --paths 2000 --steps 10"},
      {"optimize", "--scenario lq_robust --paths 2000 --steps 10 --max-iters 3"},
      {"audit", "--scenario lq_robust --paths 2000 --steps 10 --probes 2 --midpoints 20"},
  };
  fs::create_directories(scratch / "ac10");
  for (const auto& [sub, args] : runs) {
    std::vector<std::map<std::string, std::string>> snaps;
    std::vector<int> codes;
    for (const char* tag : {"a", "b"}) {
      const fs::path dir = scratch / "ac10" / sub / tag;
      fs::remove_all(dir);
      const std::string cmd = "\"" + cli + "\" " + sub + " " + args + " --out \"" + dir.string() + "\" > \"" +
                              (scratch / "ac10" / (sub + "_" + tag + ".log")).string() + "\" 2>&1";
      codes.push_back(std::system(cmd.c_str()));
      snaps.push_back(fs::exists(dir) ? snapshot(dir) : std::map<std::string, std::string>{});
    }
    o.check(!snaps[0].empty() && snaps[0] == snaps[1] && codes[0] == codes[1],
            sub + ": " + std::to_string(snaps[0].size()) + " files, identical " +
                (snaps[0] == snaps[1] ? "yes" : "no") + ", exit status " + std::to_string(codes[0]));
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: %s <rmp binary> <scratch dir> [criteria...]\n", argv[0]);
    return 64;
  }
  const std::string cli = argv[1];
  const fs::path scratch = argv[2];
  fs::create_directories(scratch);
  std::set<int> only;
  for (int i = 3; i < argc; ++i) only.insert(std::atoi(argv[i]));

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1 Cole-Hopf oracle for the quadratic BSDE", ac1},
      {"AC2 duality identity", ac2},
      {"AC3 closed-form vs Euler adjoint", ac3},
      {"AC4 variational convergence", ac4},
      {"AC5 variational derivative", ac5},
      {"AC6 BMO toolbox", ac6},
      {"AC7 robust optimization and MP certification", ac7},
      {"AC8 sufficiency audit", ac8},
      {"AC9 parameter continuity", ac9},
      {"AC10 determinism", [&] { return ac10(cli, scratch); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && !only.count(static_cast<int>(i + 1))) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out.pass = false;
      out.notes.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const auto& n : out.notes) std::printf("    %s\n", n.c_str());
    std::printf("[%s] %s (%.0fs)\n", out.pass ? "PASS" : "FAIL", criteria[i].first.c_str(), secs);
    std::fflush(stdout);
    if (!out.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
