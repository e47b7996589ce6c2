#include "algae/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "algae/estimator.hpp"
#include "algae/hjb.hpp"
#include "algae/reduced.hpp"
#include "algae/simulator.hpp"

namespace algae {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmtg(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Shared state of one run: resolved keys, output directory, manifest under
// construction.  Every table starts with the same deterministic header block;
// wall-clock times go only into the manifest so identical configs produce
// byte-identical tables.
struct RunContext {
  const RunConfig& cfg;
  KeyValues keys;
  std::string hash;
  fs::path out;
  json diagnostics = json::object();
  std::vector<std::string> artifacts;
  bool quiet = false;
  std::ostream& err;

  RunContext(const RunConfig& c, bool q, std::ostream& e)
      : cfg(c), keys(canonical_keys(c)), hash(config_hash_hex(c)), out(c.out_dir), quiet(q), err(e) {}

  void note(const std::string& msg) {
    if (!quiet) err << "[algaectl] " << msg << "\n";
  }

  std::ofstream table(const std::string& name) {
    const fs::path path = out / name;
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write " + path.string());
    artifacts.push_back(name);
    return f;
  }

  void header(std::ostream& o, const std::string& title) const {
    o << "# algaectl " << title << "\n";
    o << "# config_hash: " << hash << "\n";
    for (const auto& [k, v] : keys) o << "# " << k << " = " << v << "\n";
  }
};

json solver_diag(const Solution& sol) {
  json d;
  d["residual"] = sol.diag.final_residual;
  d["steps"] = sol.diag.steps;
  d["converged"] = sol.diag.converged;
  d["stability_number"] = sol.diag.stability_number;
  d["value_cap"] = sol.diag.value_cap;
  d["max_bound_violation"] = sol.diag.max_bound_violation;
  d["max_monotonicity_violation"] = sol.diag.max_monotonicity_violation;
  d["max_consistency_gap"] = sol.diag.max_consistency_gap;
  d["max_intervention_gap"] = sol.diag.max_intervention_gap;
  d["phi_at_origin"] = sol.diag.phi_at_origin;
  d["wall_seconds"] = sol.diag.wall_seconds;
  return d;
}

void write_solution_table(RunContext& ctx, const std::string& name, const Solution& sol,
                          const ModelParams& p, const Grid& g) {
  const bool flex = sol.kind == SystemKind::flexible;
  std::ofstream f = ctx.table(name);
  ctx.header(f, flex ? "flexible solution" : "inflexible solution");
  f << "# residual: " << fmt17(sol.diag.final_residual) << "\n";
  f << "# steps: " << sol.diag.steps << "\n";
  f << "# converged: " << (sol.diag.converged ? 1 : 0) << "\n";
  f << "# stability_number: " << fmt17(sol.diag.stability_number) << "\n";
  if (flex)
    f << "# columns: i, x, Phi, Psi_lo, Psi_hi, zstar, lamstar\n";
  else
    f << "# columns: i, x, Phi, Psi_keep_lo, Psi_keep_hi, Psi_cut_lo, Psi_cut_hi, zstar, lamstar\n";
  for (int i = 0; i < sol.phi.regimes; ++i) {
    for (int j = 0; j < sol.phi.nodes; ++j) {
      f << i << ", " << fmt17(g.x(j)) << ", " << fmt17(sol.phi.at(i, j));
      for (int s = 0; s < sol.psi.slots; ++s) f << ", " << fmt17(sol.psi.at(i, s, j));
      const double zstar = sol.policy.harvests(i, j) ? p.zbar : 0.0;
      const double lamstar = sol.policy.intensifies(i, j) ? p.lambda_hi : p.lambda_lo;
      f << ", " << fmt17(zstar) << ", " << fmt17(lamstar) << "\n";
    }
  }
  if (!f) throw ConfigError("failed writing " + name);
}

void write_voi_table(RunContext& ctx, const std::string& name, const VoiField& voi, const Grid& g) {
  std::ofstream f = ctx.table(name);
  ctx.header(f, "value of information V = Phi_inflexible - Phi_flexible");
  f << "# voi_min: " << fmt17(voi.min_value) << "\n";
  f << "# voi_scale: " << fmt17(voi.scale) << "\n";
  f << "# columns: i, x, V\n";
  for (int i = 0; i < voi.v.regimes; ++i)
    for (int j = 0; j < voi.v.nodes; ++j)
      f << i << ", " << fmt17(g.x(j)) << ", " << fmt17(voi.v.at(i, j)) << "\n";
  if (!f) throw ConfigError("failed writing " + name);
}

void write_estimate_table(RunContext& ctx, const std::string& name, const Estimate& est) {
  std::ofstream f = ctx.table(name);
  ctx.header(f, "Monte Carlo estimate of the discounted performance index");
  f << "# columns: metric, value\n";
  f << "mean, " << fmt17(est.mean) << "\n";
  f << "se, " << fmt17(est.se) << "\n";
  f << "disutility, " << fmt17(est.disutility) << "\n";
  f << "observation, " << fmt17(est.observation) << "\n";
  f << "harvest, " << fmt17(est.harvest) << "\n";
  f << "paths, " << est.paths << "\n";
  f << "truncation_bound, " << fmt17(est.truncation_bound) << "\n";
  if (!f) throw ConfigError("failed writing " + name);
}

void write_event_log(RunContext& ctx, const std::string& name, const std::vector<SimEvent>& log) {
  std::ofstream f = ctx.table(name);
  ctx.header(f, "event log of the first simulated path");
  if (!log.empty())
    f << "# initial: regime=" << log[0].regime << ", x0=" << fmt17(log[0].x_after)
      << ", lambda0=" << fmt17(log[0].lambda_next) << "\n";
  f << "# columns: t, kind, regime, X_before, X_after, z, lambda_next\n";
  for (std::size_t k = 1; k < log.size(); ++k) {
    const SimEvent& e = log[k];
    f << fmt17(e.t) << ", " << (e.kind == 's' ? "switch" : "obs") << ", " << e.regime << ", "
      << fmt17(e.x_before) << ", " << fmt17(e.x_after) << ", " << fmt17(e.z) << ", "
      << fmt17(e.lambda_next) << "\n";
  }
  if (!f) throw ConfigError("failed writing " + name);
}

int mode_solve(RunContext& ctx, SystemKind kind) {
  const RunConfig& cfg = ctx.cfg;
  const RegimeChain chain = cfg.chain.build();
  SolveOptions opt;
  opt.threads = cfg.threads;
  ctx.note("solving " + std::string(kind == SystemKind::flexible ? "flexible" : "inflexible") +
           " system: " + std::to_string(chain.regimes()) + " regimes, N=" +
           std::to_string(cfg.grid.nodes));
  const Solution sol = kind == SystemKind::flexible
                           ? solve_flexible(chain, cfg.model, cfg.grid, opt)
                           : solve_inflexible(chain, cfg.model, cfg.grid, opt);
  if (!sol.diag.converged)
    ctx.err << "warning: residual " << fmt17(sol.diag.final_residual)
            << " still above tol_ss at the pseudo-time horizon\n";
  const std::string name =
      kind == SystemKind::flexible ? "solution_flexible.csv" : "solution_inflexible.csv";
  write_solution_table(ctx, name, sol, cfg.model, cfg.grid);
  ctx.diagnostics["solver"] = solver_diag(sol);
  return 0;
}

int mode_voi(RunContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const RegimeChain chain = cfg.chain.build();
  SolveOptions opt;
  opt.threads = cfg.threads;
  ctx.note("solving flexible system");
  const Solution flex = solve_flexible(chain, cfg.model, cfg.grid, opt);
  ctx.note("solving inflexible system");
  const Solution inflex = solve_inflexible(chain, cfg.model, cfg.grid, opt);
  const VoiField voi = value_of_information(inflex.phi, flex.phi);
  write_solution_table(ctx, "solution_flexible.csv", flex, cfg.model, cfg.grid);
  write_solution_table(ctx, "solution_inflexible.csv", inflex, cfg.model, cfg.grid);
  write_voi_table(ctx, "voi.csv", voi, cfg.grid);
  ctx.diagnostics["flexible"] = solver_diag(flex);
  ctx.diagnostics["inflexible"] = solver_diag(inflex);
  ctx.diagnostics["voi_min"] = voi.min_value;
  ctx.diagnostics["voi_scale"] = voi.scale;
  return 0;
}

int mode_simulate(RunContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const RegimeChain chain = cfg.chain.build();
  const SimSpec& s = cfg.sim;

  SimConfig sc;
  sc.start_regime = s.start_regime;
  sc.start_population = s.start_population;
  sc.horizon = s.horizon;
  sc.paths = s.paths;
  sc.seed = cfg.seed;
  sc.ode_substep = s.substep;
  sc.use_rk4 = s.use_rk4;
  sc.threads = cfg.threads;
  sc.validate(chain, cfg.model);

  const bool flexible = s.system == "flexible";
  std::unique_ptr<FlexiblePolicy> fpol;
  std::unique_ptr<InflexiblePolicy> ipol;
  if (s.policy == "field") {
    SolveOptions opt;
    opt.threads = cfg.threads;
    ctx.note("solving " + s.system + " system for the field policy");
    const Solution sol = flexible ? solve_flexible(chain, cfg.model, cfg.grid, opt)
                                  : solve_inflexible(chain, cfg.model, cfg.grid, opt);
    write_solution_table(
        ctx, flexible ? "solution_flexible.csv" : "solution_inflexible.csv", sol, cfg.model,
        cfg.grid);
    ctx.diagnostics["solver"] = solver_diag(sol);
    if (flexible)
      fpol = std::make_unique<FieldFlexiblePolicy>(sol, chain, cfg.model);
    else
      ipol = std::make_unique<FieldInflexiblePolicy>(sol);
  } else {
    if (flexible)
      fpol = std::make_unique<ConstantFlexiblePolicy>(s.cut, s.dense);
    else
      ipol = std::make_unique<ConstantInflexiblePolicy>(s.cut, s.dense);
  }

  ctx.note("simulating " + std::to_string(s.paths) + " paths");
  const Estimate est = flexible ? estimate_flexible(chain, cfg.model, *fpol, sc)
                                : estimate_inflexible(chain, cfg.model, *ipol, sc);
  write_estimate_table(ctx, "estimate.csv", est);
  if (s.event_log) {
    std::vector<SimEvent> log;
    if (flexible)
      simulate_flexible_path(chain, cfg.model, *fpol, sc, sc.seed, &log);
    else
      simulate_inflexible_path(chain, cfg.model, *ipol, sc, sc.seed, &log);
    write_event_log(ctx, "events.csv", log);
  }
  json d;
  d["mean"] = est.mean;
  d["se"] = est.se;
  d["disutility"] = est.disutility;
  d["observation"] = est.observation;
  d["harvest"] = est.harvest;
  d["paths"] = est.paths;
  d["truncation_bound"] = est.truncation_bound;
  ctx.diagnostics["estimate"] = d;
  return 0;
}

int mode_estimate_chain(RunContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  ctx.note("loading discharge series from " + cfg.est.input);
  const DischargeSeries series = load_discharge_series(cfg.est.input, cfg.est.sample_interval);
  const std::vector<double> levels =
      cfg.est.levels.empty() ? default_discharge_grid(cfg.est.regimes) : cfg.est.levels;
  const ChainEstimate est = estimate_chain(series, levels);
  const RegimeChain chain = chain_from_estimate(est, levels);

  const fs::path matrix_path = ctx.out / "chain_estimate.txt";
  write_chain_matrix(matrix_path.string(), chain, est.sample_interval, est.entropy);
  {
    std::ofstream append(matrix_path, std::ios::app);
    append << "# config_hash: " << ctx.hash << "\n";
    if (!append) throw ConfigError("cannot write " + matrix_path.string());
  }
  ctx.artifacts.push_back("chain_estimate.txt");

  std::ofstream f = ctx.table("chain_report.csv");
  ctx.header(f, "regime estimate report");
  f << "# samples: " << series.samples.size() << "\n";
  f << "# sample_interval_days: " << fmt17(est.sample_interval) << "\n";
  f << "# usable_pairs: " << est.usable_pairs << "\n";
  f << "# entropy_nats: " << fmt17(est.entropy) << "\n";
  f << "# columns: i, level, occupancy, visited, row_pairs\n";
  for (int i = 0; i < est.regimes; ++i) {
    f << i << ", " << fmt17(levels[static_cast<std::size_t>(i)]) << ", "
      << fmt17(est.occupancy[static_cast<std::size_t>(i)]) << ", "
      << (est.visited[static_cast<std::size_t>(i)] ? 1 : 0) << ", "
      << est.row_pairs[static_cast<std::size_t>(i)] << "\n";
  }
  if (!f) throw ConfigError("failed writing chain_report.csv");

  json d;
  d["regimes"] = est.regimes;
  d["samples"] = series.samples.size();
  d["usable_pairs"] = est.usable_pairs;
  d["entropy_nats"] = est.entropy;
  ctx.diagnostics["estimator"] = d;
  return 0;
}

int mode_oracle_check(RunContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const ReducedConfig rc = reduced_numeric_config(cfg.reduced, cfg.reduced_nodes);
  const ReducedSolution& exact = rc.exact;
  SolveOptions opt;
  opt.threads = cfg.threads;
  ctx.note("marching the reduced configuration, N=" + std::to_string(rc.grid.nodes));
  const Solution sol = solve_flexible(rc.tables, rc.grid, opt);

  // numerical slope Phi(i, x)/x against the closed-form coefficient on the
  // band x in [0.05, 0.5]
  double max_err[2] = {0.0, 0.0};
  const double coef[2] = {exact.c0, exact.c1};
  for (int i = 0; i < 2; ++i) {
    for (int j = 1; j < rc.grid.nodes; ++j) {
      const double x = rc.grid.x(j);
      if (x < 0.05 - 1e-12 || x > 0.5 + 1e-12) continue;
      const double slope = sol.phi.at(i, j) / x;
      max_err[i] = std::max(max_err[i], std::abs(slope - coef[i]) / std::abs(coef[i]));
    }
  }
  const double worst = std::max(max_err[0], max_err[1]);
  const bool pass = sol.diag.converged && worst <= kOracleTol;

  std::ofstream f = ctx.table("oracle_report.csv");
  ctx.header(f, "closed-form oracle check");
  f << "# c0: " << fmt17(exact.c0) << "\n";
  f << "# c1: " << fmt17(exact.c1) << "\n";
  f << "# det: " << fmt17(exact.det) << "\n";
  f << "# closed_form_residual: " << fmt17(exact.residual) << "\n";
  f << "# from_direct_solve: " << (exact.from_direct_solve ? 1 : 0) << "\n";
  f << "# pattern_valid: " << (exact.pattern_valid ? 1 : 0) << "\n";
  f << "# harvest_pays_low: " << (exact.report.harvest_pays_low ? 1 : 0) << "\n";
  f << "# printed_cap_flood: " << (exact.report.printed_cap_flood ? 1 : 0) << "\n";
  f << "# implied_cap_flood: " << (exact.report.implied_cap_flood ? 1 : 0) << "\n";
  f << "# small_cost_form: " << (exact.report.small_cost_form ? 1 : 0) << "\n";
  f << "# min_flood_multiplier: " << fmt17(exact.report.min_flood_multiplier) << "\n";
  f << "# solver_residual: " << fmt17(sol.diag.final_residual) << "\n";
  f << "# solver_steps: " << sol.diag.steps << "\n";
  f << "# solver_converged: " << (sol.diag.converged ? 1 : 0) << "\n";
  f << "# band: 0.05 <= x <= 0.5\n";
  f << "# tolerance: " << fmt17(kOracleTol) << "\n";
  f << "# oracle_max_rel_err: " << fmt17(worst) << "\n";
  f << "# oracle_pass: " << (pass ? 1 : 0) << "\n";
  f << "# columns: i, C_closed, max_rel_err\n";
  f << "0, " << fmt17(exact.c0) << ", " << fmt17(max_err[0]) << "\n";
  f << "1, " << fmt17(exact.c1) << ", " << fmt17(max_err[1]) << "\n";
  if (!f) throw ConfigError("failed writing oracle_report.csv");

  json d;
  d["c0"] = exact.c0;
  d["c1"] = exact.c1;
  d["max_rel_err"] = worst;
  d["tolerance"] = kOracleTol;
  d["pass"] = pass;
  d["solver"] = solver_diag(sol);
  ctx.diagnostics["oracle"] = d;
  if (!pass) {
    ctx.err << "oracle-check failed: max relative slope error " << fmt17(worst) << " exceeds "
            << fmt17(kOracleTol) << (sol.diag.converged ? "" : " (march did not converge)")
            << "\n";
    return 1;
  }
  ctx.note("oracle-check passed: max relative slope error " + fmt17(worst));
  return 0;
}

int mode_sweep(RunContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const RegimeChain chain = cfg.chain.build();
  const std::string& axis = cfg.sweep.axis;
  std::string axis_token = axis;
  for (char& c : axis_token)
    if (c == '.') c = '_';
  const bool voi_mode = cfg.sweep.mode == "voi";
  const SystemKind solve_kind = cfg.sweep.mode == "solve-inflexible" ? SystemKind::inflexible
                                                                     : SystemKind::flexible;

  SlotField warm_flex, warm_inflex;
  json points = json::array();
  // regime-0 curves per sweep value, for the combined table
  std::vector<std::vector<double>> curves;
  std::vector<std::string> labels;
  int curve_nodes = -1;
  Grid curve_grid;

  for (const double value : cfg.sweep.values) {
    RunConfig pt = cfg;
    apply_sweep_axis(pt, axis, value);
    const std::string token = axis_token + "_" + fmtg(value);
    ctx.note("sweep point " + axis + " = " + fmtg(value));

    const auto warm_opt = [&](const SlotField& warm, int slots) {
      SolveOptions opt;
      opt.threads = cfg.threads;
      if (warm.regimes == chain.regimes() && warm.nodes == pt.grid.nodes && warm.slots == slots)
        opt.warm_start = &warm;
      return opt;
    };

    json pd;
    pd["value"] = value;
    std::vector<double> curve;
    if (voi_mode) {
      const Solution flex =
          solve_flexible(chain, pt.model, pt.grid, warm_opt(warm_flex, kFlexSlots));
      const Solution inflex =
          solve_inflexible(chain, pt.model, pt.grid, warm_opt(warm_inflex, kCommitSlots));
      const VoiField voi = value_of_information(inflex.phi, flex.phi);
      write_voi_table(ctx, "voi_" + token + ".csv", voi, pt.grid);
      curve.assign(voi.v.row(0), voi.v.row(0) + voi.v.nodes);
      warm_flex = flex.psi;
      warm_inflex = inflex.psi;
      pd["flexible"] = solver_diag(flex);
      pd["inflexible"] = solver_diag(inflex);
      pd["voi_min"] = voi.min_value;
    } else {
      const Solution sol =
          solve_kind == SystemKind::flexible
              ? solve_flexible(chain, pt.model, pt.grid, warm_opt(warm_flex, kFlexSlots))
              : solve_inflexible(chain, pt.model, pt.grid, warm_opt(warm_inflex, kCommitSlots));
      write_solution_table(ctx, "solution_" + token + ".csv", sol, pt.model, pt.grid);
      curve.assign(sol.phi.row(0), sol.phi.row(0) + sol.phi.nodes);
      if (solve_kind == SystemKind::flexible)
        warm_flex = sol.psi;
      else
        warm_inflex = sol.psi;
      pd["solver"] = solver_diag(sol);
    }
    if (curve_nodes < 0) {
      curve_nodes = static_cast<int>(curve.size());
      curve_grid = pt.grid;
    }
    if (static_cast<int>(curve.size()) == curve_nodes) {
      curves.push_back(std::move(curve));
      labels.push_back(axis + "=" + fmtg(value));
    }
    points.push_back(std::move(pd));
  }

  // combined regime-0 curve across the sweep (skipped if node counts differ)
  if (curves.size() == cfg.sweep.values.size()) {
    const std::string what = voi_mode ? "V" : "Phi";
    const std::string name = voi_mode ? "sweep_voi_regime0.csv" : "sweep_phi_regime0.csv";
    std::ofstream f = ctx.table(name);
    ctx.header(f, "regime-0 " + what + " across the sweep");
    f << "# columns: x";
    for (const std::string& lab : labels) f << ", " << what << "(" << lab << ")";
    f << "\n";
    for (int j = 0; j < curve_nodes; ++j) {
      f << fmt17(curve_grid.x(j));
      for (const auto& c : curves) f << ", " << fmt17(c[static_cast<std::size_t>(j)]);
      f << "\n";
    }
    if (!f) throw ConfigError("failed writing " + name);
  }
  ctx.diagnostics["points"] = std::move(points);
  return 0;
}

int dispatch(RunContext& ctx) {
  switch (ctx.cfg.mode) {
    case RunMode::solve_flexible: return mode_solve(ctx, SystemKind::flexible);
    case RunMode::solve_inflexible: return mode_solve(ctx, SystemKind::inflexible);
    case RunMode::voi: return mode_voi(ctx);
    case RunMode::simulate: return mode_simulate(ctx);
    case RunMode::estimate_chain: return mode_estimate_chain(ctx);
    case RunMode::oracle_check: return mode_oracle_check(ctx);
    case RunMode::sweep: return mode_sweep(ctx);
  }
  throw ConfigError("mode: unhandled mode");
}

}  // namespace

int run(const RunConfig& cfg, bool quiet, std::ostream* errp) {
  std::ostream& err = errp ? *errp : std::cerr;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    RunContext ctx(cfg, quiet, err);
    if (!ctx.out.empty()) fs::create_directories(ctx.out);
    const int code = dispatch(ctx);

    json manifest;
    manifest["tool"] = "algaectl";
    manifest["version"] = kToolVersion;
    manifest["compiler"] = __VERSION__;
    manifest["mode"] = to_string(cfg.mode);
    manifest["config_hash"] = ctx.hash;
    manifest["seed"] = cfg.seed;
    manifest["threads"] = cfg.threads;
    manifest["generated_at"] = utc_now();
    json resolved;
    for (const auto& [k, v] : ctx.keys) resolved[k] = v;
    manifest["resolved_config"] = std::move(resolved);
    manifest["artifacts"] = ctx.artifacts;
    manifest["diagnostics"] = std::move(ctx.diagnostics);
    manifest["exit_code"] = code;
    manifest["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const fs::path mpath = ctx.out / "manifest.json";
    std::ofstream mf(mpath);
    if (!mf) throw ConfigError("cannot write " + mpath.string());
    mf << manifest.dump(2) << "\n";
    return code;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const StabilityError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const SolverError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"algaectl: regime-switching stock control (solve, simulate, estimate, sweep)"};
  app.set_version_flag("--version", std::string("algaectl ") + kToolVersion);
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  bool quiet = false;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "configuration file (flat key=value or .json)");
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sub->add_option("--seed", seed, "seed override");
    sub->add_option("--threads", threads, "0 = parallel default, 1 = serial reference");
    sub->add_flag("--quiet", quiet, "suppress progress notes");
    return sub;
  };
  add_common(app.add_subcommand("solve", "solve one optimality system and extract the policy"));
  add_common(app.add_subcommand("voi", "solve both systems and tabulate the value of information"));
  add_common(app.add_subcommand("simulate", "Monte Carlo estimate of a policy's performance"));
  add_common(app.add_subcommand("estimate-chain", "estimate a regime chain from a discharge series"));
  add_common(app.add_subcommand("oracle-check", "march the reduced configuration against its closed form"));
  add_common(app.add_subcommand("sweep", "re-solve across a parameter axis (warm-started)"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    std::vector<std::string> allowed;
    if (name == "solve")
      allowed = {"solve-flexible", "solve-inflexible"};
    else
      allowed = {name};

    KeyValues keys;
    if (config_path.empty()) {
      RunConfig def = default_run_config();
      def.mode = run_mode_from(allowed.front());
      keys = canonical_keys(def);
    } else {
      keys = load_config_keys(config_path);
    }
    const auto it = keys.find("mode");
    if (it == keys.end()) {
      keys["mode"] = allowed.front();
    } else {
      bool ok = false;
      for (const std::string& a : allowed) ok = ok || it->second == a;
      if (!ok)
        throw ConfigError("mode: '" + it->second + "' does not match subcommand '" + name + "'");
    }

    RunConfig cfg = config_from_keys(keys);
    if (sub->count("--seed")) cfg.seed = seed;
    if (sub->count("--out")) cfg.out_dir = out_dir;
    if (sub->count("--threads")) cfg.threads = threads;
    return run(cfg, quiet);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace algae
