#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "rmp/optimizer.hpp"
#include "rmp/report.hpp"

#ifndef RMP_VERSION
#define RMP_VERSION "0.0.0"
#endif

namespace rmp::cli {

namespace {

using Options = std::vector<std::pair<std::string, std::string>>;

struct Common {
  std::string scenario = "lq_robust";
  std::string out = "rmp_out";
  std::int64_t seed = -1;
  std::int64_t paths = -1;
  std::int64_t steps = -1;
  double tol = -1.0;
};

std::string num(double x) { return format_number(x); }

std::string join(const std::vector<double>& xs, const char* sep = " ") {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? sep : "") + num(xs[i]);
  return s;
}

std::string join(const std::vector<std::size_t>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? " " : "") + std::to_string(xs[i]);
  return s;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse " + what + " entry '" + item + "'");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos)
      throw ConfigError("cannot parse " + what + " entry '" + item + "'");
    out.push_back(x);
  }
  if (out.empty()) throw ConfigError(what + " is empty");
  return out;
}

// Overrides change the grid and sample size, so validation runs after them.
ScenarioSpec load(const Common& c) {
  ScenarioSpec spec;
  const bool is_file = c.scenario.find('{') == std::string::npos && std::filesystem::exists(c.scenario);
  spec = is_file ? load_scenario_file(c.scenario, false) : load_scenario(c.scenario, false);
  if (c.seed >= 0) spec.seed = static_cast<std::uint64_t>(c.seed);
  if (c.paths == 0 || c.steps == 0) throw ConfigError("--paths and --steps must be positive");
  if (c.paths > 0) spec.n_paths = static_cast<std::size_t>(c.paths);
  if (c.steps > 0) spec.grid.n_steps = static_cast<std::size_t>(c.steps);
  if (c.tol >= 0.0) spec.solver.tol_mult = c.tol;
  return spec;
}

// Empty text: the scenario's initial control. Otherwise k values (constant),
// N * k values (per step), or a CSV file whose last k columns hold one step per row.
ControlProcess parse_control(const std::string& text, const ScenarioSpec& spec) {
  const std::size_t N = spec.grid.n_steps, k = spec.controls.dim();
  if (text.empty()) return spec.default_control();
  std::vector<double> vals;
  if (std::filesystem::exists(text)) {
    std::ifstream in(text);
    if (!in) throw ConfigError("cannot open control file '" + text + "'");
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::vector<std::string> fields;
      std::stringstream ss(line);
      std::string f;
      while (std::getline(ss, f, ',')) fields.push_back(f);
      if (fields.size() < k) throw ConfigError("control file row has fewer than " + std::to_string(k) + " columns");
      std::vector<double> row;
      try {
        for (std::size_t j = fields.size() - k; j < fields.size(); ++j) row.push_back(std::stod(fields[j]));
      } catch (const std::exception&) {
        continue;  // header
      }
      vals.insert(vals.end(), row.begin(), row.end());
    }
  } else {
    vals = parse_list(text, "control");
  }
  ControlProcess v;
  if (vals.size() == k)
    v = ControlProcess::constant(N, vals);
  else if (vals.size() == N * k)
    v = ControlProcess(N, k, vals);
  else
    throw ConfigError("control has " + std::to_string(vals.size()) + " values; expected " +
                      std::to_string(k) + " or " + std::to_string(N * k));
  for (std::size_t s = 0; s < N; ++s)
    if (!spec.controls.contains(v.at(s), 1e-12))
      throw DomainError("control leaves the control set at step " + std::to_string(s));
  return v;
}

ControlProcess default_direction(const ScenarioSpec& spec) {
  const std::size_t N = spec.grid.n_steps, k = spec.controls.dim();
  std::vector<double> vals(N * k);
  for (std::size_t s = 0; s < N; ++s)
    for (std::size_t j = 0; j < k; ++j) {
      const double lo = spec.controls.lower()[j], hi = spec.controls.upper()[j];
      vals[s * k + j] = lo + (hi - lo) * (0.6 + 0.15 * std::sin(2.0 * M_PI * spec.grid.time(s)));
    }
  return ControlProcess(N, k, vals);
}

void print_table(std::ostream& out, const Table& t, std::size_t max_rows = 12) {
  std::vector<std::size_t> w(t.columns.size());
  for (std::size_t c = 0; c < w.size(); ++c) w[c] = t.columns[c].size();
  const std::size_t shown = std::min(max_rows, t.rows.size());
  for (std::size_t r = 0; r < shown; ++r)
    for (std::size_t c = 0; c < w.size() && c < t.rows[r].size(); ++c)
      w[c] = std::max(w[c], std::min<std::size_t>(t.rows[r][c].size(), 40));
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < w.size(); ++c) {
      std::string cell = c < cells.size() ? cells[c] : "";
      if (cell.size() > 40) cell = cell.substr(0, 37) + "...";
      out << (c ? "  " : "") << std::left << std::setw(static_cast<int>(w[c])) << cell;
    }
    out << "\n";
  };
  out << t.name << ":\n";
  line(t.columns);
  for (std::size_t r = 0; r < shown; ++r) line(t.rows[r]);
  if (shown < t.rows.size()) out << "... " << t.rows.size() - shown << " more rows\n";
}

struct Outcome {
  std::vector<Table> tables;
  std::vector<std::size_t> summary;  // tables printed to stdout
  int code = kOk;
};

// ------------------------------------------------------------------ subcommands

Outcome cmd_validate(const ScenarioSpec& spec, std::size_t probes) {
  check_structure(spec);
  const AssumptionReport rep = validate_assumptions(spec, probes);
  Table t{"assumptions", {"assumption", "passed", "worst_ratio", "witness"}, {}};
  for (const auto& c : rep.checks)
    t.add({c.name, c.passed ? "yes" : "no", num(c.worst_ratio), c.witness});
  Outcome o;
  o.tables.push_back(std::move(t));
  o.summary = {0};
  o.code = rep.all_passed() ? kOk : kValidation;
  return o;
}

Outcome cmd_simulate(const ScenarioSpec& spec, const ControlProcess& control,
                     const BrownianEnsemble& noise) {
  const std::size_t N = spec.grid.n_steps, m = 1, d = spec.coef().noise_dim();
  const RobustState rs = evaluate_states(spec, control, noise);
  Table sum{"simulate", {"theta", "y0", "y0_se", "mean_x_T", "cost", "cost_se", "picard_iters", "max_regression_residual"}, {}};
  Table traj{"trajectory", {"theta", "step", "t", "mean_x", "mean_y", "mean_z_sq"}, {}};
  for (std::size_t th = 0; th < rs.states.size(); ++th) {
    const StateSolution& st = rs.states[th];
    const MeanAndError y0 = st.backward.y0_estimate();
    double res = 0.0;
    for (double r : st.backward.regression_residual) res = std::max(res, r);
    sum.add({spec.theta[th].label, num(y0.mean), num(y0.se), num(st.forward.mean_at(N)[0]),
             num(rs.eval.g[th]), num(rs.eval.g_se[th]), std::to_string(st.backward.picard_iters), num(res)});
    for (std::size_t s = 0; s <= N; ++s) {
      double z2 = 0.0;
      for (std::size_t p = 0; p < noise.n_paths(); ++p)
        for (std::size_t j = 0; j < m * d; ++j) z2 += st.backward.z(s, p, j) * st.backward.z(s, p, j);
      z2 /= static_cast<double>(noise.n_paths());
      traj.add({spec.theta[th].label, std::to_string(s), num(spec.grid.time(s)), num(st.forward.mean_at(s)[0]),
                num(st.backward.y.mean(s)), num(z2)});
    }
  }
  Outcome o;
  o.tables = {std::move(sum), std::move(traj)};
  o.summary = {0};
  return o;
}

Outcome cmd_bmo(const ScenarioSpec& spec, const ControlProcess& control, const BrownianEnsemble& noise,
                double p) {
  Table t{"bmo", {"theta", "integrand", "norm", "norm_q999", "p_m", "p_m_conjugate", "p", "reverse_holder_K",
                  "jn_theta", "jn_bound", "exp_mean_T", "exp_se_T", "status"}, {}};
  const std::size_t N = spec.grid.n_steps;
  for (const auto& pt : spec.theta.points()) {
    const StateSolution st = solve_state(spec, pt.coord, control, noise);
    const PathField fz = z_sensitivity(spec, st);
    PathField zs(N, noise.n_paths(), st.backward.z.width());
    for (std::size_t s = 0; s < N; ++s)
      for (std::size_t q = 0; q < noise.n_paths(); ++q)
        for (std::size_t j = 0; j < zs.width(); ++j) zs(s, q, j) = st.backward.z(s, q, j);
    for (const auto& [label, field] : {std::pair<const char*, const PathField*>{"z", &zs}, {"f_z", &fz}}) {
      const BmoEstimate e = estimate_bmo_norm(*field, st.forward.x, noise.grid(), spec.basis);
      std::string k = "", status = "ok";
      try {
        k = num(reverse_holder_K(p, e.norm));
      } catch (const DomainError& ex) {
        status = ex.what();
      }
      std::string jt = "", jb = "";
      if (e.norm > 0.0) {
        const double theta = 0.5 / (e.norm * e.norm);
        jt = num(theta);
        jb = num(john_nirenberg_bound(theta, e.norm));
      }
      const PathField dd = doleans_dade(*field, noise);
      std::vector<double> last(noise.n_paths());
      for (std::size_t q = 0; q < last.size(); ++q) last[q] = dd(N, q);
      const MeanAndError me = sample_mean(last);
      t.add({pt.label, label, num(e.norm), num(e.norm_q999), num(e.p_m), num(e.p_m_conjugate), num(p), k, jt, jb,
             num(me.mean), num(me.se), status});
    }
  }
  Outcome o;
  o.tables.push_back(std::move(t));
  o.summary = {0};
  return o;
}

Outcome cmd_variation(const ScenarioSpec& spec, const ControlProcess& vbar, const ControlProcess& v,
                      const std::vector<double>& lambdas, double p, const BrownianEnsemble& noise) {
  std::vector<double> thetas;
  for (const auto& pt : spec.theta.points()) thetas.push_back(pt.coord);
  const DeltaDiagnostics dd = convergence_sweep(spec, thetas, vbar, v, lambdas, p, noise);
  Table t{"variation", {"lambda", "delta_x", "delta_y", "delta_z"}, {}};
  for (std::size_t i = 0; i < dd.lambdas.size(); ++i)
    t.add(std::vector<double>{dd.lambdas[i], dd.norms[i].x, dd.norms[i].y, dd.norms[i].z});
  Table s{"variation_summary", {"p", "p_m", "band_low", "band_high", "slope_x", "slope_y", "slope_z"}, {}};
  s.add(std::vector<double>{dd.p, dd.p_m, dd.band_low, dd.band_high, dd.slope_x, dd.slope_y, dd.slope_z});
  Outcome o;
  o.tables = {std::move(t), std::move(s)};
  o.summary = {0, 1};
  return o;
}

Outcome cmd_duality(const ScenarioSpec& spec, const ControlProcess& vbar, const ControlProcess& v,
                    const std::vector<double>& offsets, double p, const BrownianEnsemble& noise) {
  Table t{"duality", {"theta", "lhs", "lhs_se", "rhs", "rhs_se", "rel_gap"}, {}};
  for (const auto& pt : spec.theta.points()) {
    const DualityResult r = duality_check(spec, pt.coord, vbar, v, noise);
    t.add({pt.label, num(r.lhs), num(r.lhs_se), num(r.rhs), num(r.rhs_se), num(r.gap)});
  }
  Table c{"continuity", {"theta_a", "theta_b", "distance", "p", "x", "y", "x1", "y1", "adj_p", "adj_q", "adj_r",
                         "p_m", "status"}, {}};
  for (const auto& pt : spec.theta.points())
    for (double off : offsets) {
      const double a = pt.coord, b = pt.coord + off;
      try {
        const ThetaGaps g = theta_continuity_probe(spec, a, b, vbar, v, p, noise);
        c.add({num(a), num(b), num(std::abs(off)), num(p), num(g.x), num(g.y), num(g.x1), num(g.y1), num(g.p),
               num(g.q), num(g.r), num(g.p_m), "ok"});
      } catch (const DomainError& e) {
        c.add({num(a), num(b), num(std::abs(off)), num(p), "", "", "", "", "", "", "", "", e.what()});
      }
    }
  Outcome o;
  o.tables = {std::move(t), std::move(c)};
  o.summary = {0};
  return o;
}

Outcome cmd_evaluate(const ScenarioSpec& spec, const ControlProcess& control, const BrownianEnsemble& noise) {
  const RobustEvaluation ev = evaluate_J(spec, control, noise);
  Table g{"evaluate", {"theta", "cost", "cost_se"}, {}};
  for (std::size_t th = 0; th < ev.g.size(); ++th) g.add({spec.theta[th].label, num(ev.g[th]), num(ev.g_se[th])});
  Table r{"robust", {"J", "J_se", "argmax", "active", "eps"}, {}};
  r.add({num(ev.value), num(ev.value_se), std::to_string(ev.argmax), join(ev.active), num(ev.eps)});
  Table vt{"vertices", {"vertex", "weights", "value", "active"}, {}};
  for (std::size_t j = 0; j < ev.vertex_values.size(); ++j) {
    const bool act = std::find(ev.active.begin(), ev.active.end(), j) != ev.active.end();
    vt.add({std::to_string(j), join(spec.polytope.vertex(j)), num(ev.vertex_values[j]), act ? "yes" : "no"});
  }
  Outcome o;
  o.tables = {std::move(g), std::move(r), std::move(vt)};
  o.summary = {0, 1};
  return o;
}

Outcome cmd_optimize(const ScenarioSpec& spec, const ControlProcess& v0, const DescentOptions& opts,
                     const BrownianEnsemble& noise) {
  const OptimizationTrace tr = robust_descent(spec, v0, noise, opts);
  const std::size_t N = spec.grid.n_steps, k = spec.controls.dim();
  Table t{"trace", {"iter", "J", "J_se", "step", "worst_vertex"}, {}};
  for (std::size_t i = 0; i < tr.values.size(); ++i)
    t.add({std::to_string(i), num(tr.values[i]), num(tr.value_se[i]), num(tr.steps[i]),
           std::to_string(tr.worst_vertex[i])});
  Table r{"residual", {"step", "t", "residual", "se", "flagged"}, {}};
  const MpResidualReport& rep = tr.residual;
  for (std::size_t s = 0; s < rep.residual.size(); ++s) {
    const bool fl = std::find(rep.flagged.begin(), rep.flagged.end(), s) != rep.flagged.end();
    r.add({std::to_string(s), num(spec.grid.time(s)), num(rep.residual[s]), num(rep.step_se[s]), fl ? "yes" : "no"});
  }
  Table c{"control", {"step", "t"}, {}};
  for (std::size_t j = 0; j < k; ++j) c.columns.push_back("v" + std::to_string(j));
  for (std::size_t s = 0; s < N; ++s) {
    std::vector<std::string> row{std::to_string(s), num(spec.grid.time(s))};
    for (double x : tr.final_control().at(s)) row.push_back(num(x));
    c.add(std::move(row));
  }
  Table sm{"optimize_summary", {"certified", "stalled", "stop_reason", "iterations", "rejected", "J", "J_se",
                                "min_residual", "tol", "q_bar"}, {}};
  sm.add({tr.certified ? "yes" : "no", tr.stalled ? "yes" : "no", tr.stop_reason, std::to_string(tr.accepted_steps()),
          std::to_string(tr.rejected), num(tr.values.back()), num(tr.value_se.back()), num(rep.min_residual),
          num(rep.tol), join(rep.q_bar)});
  Outcome o;
  o.tables = {std::move(t), std::move(r), std::move(c), std::move(sm)};
  o.summary = {0, 3};
  o.code = tr.certified ? kOk : kNotCertified;
  return o;
}

Outcome cmd_audit(const ScenarioSpec& spec, const ControlProcess& vbar, std::size_t n_random,
                  const std::vector<double>& lambdas, std::size_t midpoints, std::uint64_t probe_seed,
                  const BrownianEnsemble& noise) {
  const RobustState base = evaluate_states(spec, vbar, noise);
  const std::vector<ControlProcess> probes = make_probes(spec, vbar, n_random, probe_seed);
  const QBarResult qb = find_Q_bar(spec, base, probes, noise);
  const AuditReport rep = sufficiency_audit(spec, vbar, qb.q_bar, probes, lambdas, noise, midpoints, probe_seed);
  Table h{"audit_hypotheses", {"hypothesis", "passed", "worst_excess", "witness"}, {}};
  for (const auto& c : rep.hypotheses) h.add({c.name, c.passed ? "yes" : "no", num(c.worst_excess), c.witness});
  Table p{"audit_probes", {"probe", "lambda", "difference", "se", "passed"}, {}};
  for (const auto& c : rep.probes)
    p.add({std::to_string(c.probe), num(c.lambda), num(c.difference), num(c.se), c.passed ? "yes" : "no"});
  Table s{"audit_summary", {"verdict", "hypotheses_hold", "probes_pass", "q_bar", "q_bar_feasible", "q_bar_value",
                            "q_bar_tol"}, {}};
  s.add({rep.verdict, rep.hypotheses_hold ? "yes" : "no", rep.probes_pass ? "yes" : "no", join(qb.q_bar),
         qb.feasible ? "yes" : "no", num(qb.value), num(qb.tol)});
  Outcome o;
  o.tables = {std::move(h), std::move(p), std::move(s)};
  o.summary = {0, 2};
  return o;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--scenario", c.scenario, "built-in name, JSON document, or path to a JSON scenario file")
      ->capture_default_str();
  sub->add_option("--seed", c.seed, "override the scenario seed");
  sub->add_option("--paths", c.paths, "override the number of paths");
  sub->add_option("--steps", c.steps, "override the number of time steps");
  sub->add_option("--out", c.out, "output directory for CSV reports")->capture_default_str();
  sub->add_option("--tol", c.tol, "tolerance multiplier in standard errors (MP residual, Q-bar search)");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust maximum principle toolkit for mean-field forward-backward control", "rmp"};
  app.set_version_flag("--version", std::string(RMP_VERSION));
  app.require_subcommand(1);
  Common c;

  auto* validate = app.add_subcommand("validate", "check structure and standing assumptions");
  std::size_t n_probes = 200;
  validate->add_option("--probes", n_probes, "random points per assumption check")->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "solve the state equations and dump mean trajectories");
  auto* bmo = app.add_subcommand("bmo", "BMO diagnostics of Z and f_z along the solution");
  auto* variation = app.add_subcommand("variation", "convergence sweep of the variational quotients");
  auto* duality = app.add_subcommand("duality", "duality identity and parameter-continuity tables");
  auto* evaluate = app.add_subcommand("evaluate", "robust cost, per-parameter costs and worst-case set");
  auto* optimize = app.add_subcommand("optimize", "projected robust descent with residual certification");
  auto* audit = app.add_subcommand("audit", "sufficiency audit at a candidate control");

  std::string control, direction;
  double p_exp = 1.8, bmo_p = 1.5, cont_p = 1.9;
  std::string lambdas_text = "0.2,0.1,0.05,0.025", offsets_text = "0.1,0.05", audit_lambdas = "0.1,0.5,1";
  std::size_t max_iters = 50, n_random = 8, midpoints = 200;
  std::uint64_t probe_seed = 99;
  double step = 1.0;

  for (auto* sub : {validate, simulate, bmo, variation, duality, evaluate, optimize, audit}) add_common(sub, c);
  for (auto* sub : {simulate, bmo, variation, duality, evaluate, optimize, audit})
    sub->add_option("--control", control,
                    sub == optimize ? "initial control" : (sub == audit ? "candidate control" : "base control"))
        ->description("control: k values, N*k values, or a CSV file (last k columns); default: scenario initial");
  bmo->add_option("--p", bmo_p, "exponent for the reverse Hoelder constant")->capture_default_str();
  for (auto* sub : {variation, duality})
    sub->add_option("--direction", direction, "perturbed control v (same formats as --control)");
  variation->add_option("--lambdas", lambdas_text, "decreasing lambda list")->capture_default_str();
  variation->add_option("--p", p_exp, "norm exponent, inside the admissible band")->capture_default_str();
  duality->add_option("--offsets", offsets_text, "parameter offsets for the continuity table")->capture_default_str();
  duality->add_option("--p", cont_p, "norm exponent for the continuity table")->capture_default_str();
  optimize->add_option("--max-iters", max_iters, "iteration limit")->capture_default_str();
  optimize->add_option("--step", step, "initial step size")->capture_default_str();
  audit->add_option("--probes", n_random, "random probe controls (block bumps are always added)")
      ->capture_default_str();
  audit->add_option("--lambdas", audit_lambdas, "interpolation weights toward each probe")->capture_default_str();
  audit->add_option("--midpoints", midpoints, "midpoint samples per convexity check")->capture_default_str();
  audit->add_option("--probe-seed", probe_seed, "seed for random probes and midpoints")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  Options opts;
  for (const CLI::Option* o : sub->get_options()) {
    if (o->get_name() == "--help" || o->get_name() == "--scenario" || o->get_name() == "--out") continue;
    if (o->count() == 0) continue;
    std::string v;
    for (const auto& r : o->results()) v += (v.empty() ? "" : ",") + r;
    opts.emplace_back(o->get_name(), v);
  }

  try {
    ScenarioSpec spec = load(c);
    Outcome o;
    if (name == "validate") {
      o = cmd_validate(spec, n_probes);
    } else {
      check_structure(spec);
      const AssumptionReport rep = validate_assumptions(spec);
      if (const AssumptionCheck* f = rep.first_failure())
        throw ValidationError("assumption '" + f->name + "' fails: " + f->witness);
      const BrownianEnsemble noise = sample_brownian(spec.grid, spec.n_paths, spec.coef().noise_dim(), spec.seed);
      const ControlProcess base = parse_control(control, spec);
      if (name == "simulate") {
        o = cmd_simulate(spec, base, noise);
      } else if (name == "bmo") {
        o = cmd_bmo(spec, base, noise, bmo_p);
      } else if (name == "variation" || name == "duality") {
        const ControlProcess v = direction.empty() ? default_direction(spec) : parse_control(direction, spec);
        if (name == "variation")
          o = cmd_variation(spec, base, v, parse_list(lambdas_text, "lambda list"), p_exp, noise);
        else
          o = cmd_duality(spec, base, v, parse_list(offsets_text, "offset list"), cont_p, noise);
      } else if (name == "evaluate") {
        o = cmd_evaluate(spec, base, noise);
      } else if (name == "optimize") {
        DescentOptions d;
        d.max_iters = max_iters;
        d.step = step;
        o = cmd_optimize(spec, base, d, noise);
      } else {
        o = cmd_audit(spec, base, n_random, parse_list(audit_lambdas, "lambda list"), midpoints, probe_seed, noise);
      }
    }

    RunManifest m;
    m.tool_version = RMP_VERSION;
    m.subcommand = name;
    m.scenario = c.scenario;
    m.scenario_json = serialize(spec);
    m.seed = spec.seed;
    m.horizon = spec.grid.horizon;
    m.steps = spec.grid.n_steps;
    m.paths = spec.n_paths;
    m.options = opts;
    std::vector<std::string> files;
    try {
      files = emit_report(o.tables, m, c.out);
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      err << "rmp: " << e.what() << "\n";
      return kIo;
    }
    for (std::size_t i : o.summary) print_table(out, o.tables[i]);
    out << "manifest " << m.hash() << "\n";
    for (const auto& f : files) out << "wrote " << f << "\n";
    return o.code;
  } catch (const ConfigError& e) {
    err << "rmp: configuration error: " << e.what() << "\n";
    return kValidation;
  } catch (const ValidationError& e) {
    err << "rmp: validation failed: " << e.what() << "\n";
    return kValidation;
  } catch (const DomainError& e) {
    err << "rmp: out of domain: " << e.what() << "\n";
    return kValidation;
  } catch (const Error& e) {
    err << "rmp: solver failure: " << e.what() << "\n";
    return kSolver;
  }
}

}  // namespace rmp::cli
