#pragma once

// Command-line front end: simulate, sweep, tune, adjudicate.
// Exit codes: 0 ok, 2 config/usage error, 3 numeric error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lossyhom/lossyhom.hpp"

namespace lossyhom::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

struct Options {
  std::string config_path;
  bool oracle = false;
  std::string out_path;
  std::string jsonl_path;
  std::string units;
  std::string grids;
};

inline QuadratureGrids parse_grid_flag(const std::string& spec, QuadratureGrids base) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ',');) parts.push_back(item);
  if (parts.size() != 3) throw ConfigError("--grids: expected \"freq_points,time_points,halfwidth_sigmas\"");
  try {
    std::size_t used = 0;
    base.freq_points = std::stoi(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument("f");
    base.time_points = std::stoi(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("t");
    base.time_halfwidth_sigmas = std::stod(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("s");
  } catch (const std::logic_error&) {
    throw ConfigError("--grids: expected \"freq_points,time_points,halfwidth_sigmas\"");
  }
  base.validate();
  return base;
}

inline AppConfig load(const Options& o) {
  std::optional<Units> units;
  if (!o.units.empty()) units = parse_units(o.units, "--units");
  AppConfig app = load_config(o.config_path, units);
  if (!o.grids.empty()) {
    app.grids = parse_grid_flag(o.grids, app.grids);
    if (app.sweep) app.sweep->grids = app.grids;
  }
  return app;
}

inline void emit(std::ostream& out, const ordered_json& j) { out << j.dump(2) << '\n'; }

inline int cmd_simulate(const Options& o, std::ostream& out) {
  const auto app = load(o);
  const auto closed = coincidence_closed_form(app.interferometer);
  ordered_json j;
  j["units"] = to_string(app.interferometer.source.units);
  j["beta_convention"] = to_string(app.interferometer.beta_convention);
  j["closed_form"] = to_json(closed);
  if (o.oracle) {
    const auto oracle = coincidence_oracle(app.interferometer, app.grids);
    j["oracle"] = to_json(oracle);
    j["abs_deviation"] = std::abs(oracle.p_normalized - closed.p_normalized);
  }
  emit(out, j);
  return kExitOk;
}

inline int cmd_sweep(const Options& o, std::ostream& out) {
  const auto app = load(o);
  if (!app.sweep) throw ConfigError("sweep: missing from config");
  auto spec = *app.sweep;
  if (o.oracle) spec.oracle = true;
  const auto rows = run_sweep(app.interferometer, spec);
  if (o.out_path.empty()) {
    write_csv(out, rows);
  } else {
    std::ofstream f(o.out_path);
    if (!f) throw ConfigError("--out: cannot write \"" + o.out_path + "\"");
    write_csv(f, rows);
  }
  if (!o.jsonl_path.empty()) {
    std::ofstream f(o.jsonl_path);
    if (!f) throw ConfigError("--jsonl: cannot write \"" + o.jsonl_path + "\"");
    write_jsonl(f, rows);
  }
  return kExitOk;
}

inline int cmd_tune(const Options& o, std::ostream& out) {
  auto app = load(o);
  if (!app.tune) throw ConfigError("tune: missing from config");
  if (o.oracle) app.tune->objective = Objective::oracle;
  const auto req = make_tune_request(app);
  const auto analytic = analytic_restore(req);
  const auto best = minimize_coincidence(req);

  ordered_json j;
  j["objective"] = to_string(req.objective);
  ordered_json a;
  a["x2"] = analytic.x2;
  a["scale_im_alpha2"] = analytic.scale_im_alpha2;
  a["residual_tau_r"] = analytic.residual_tau_r;
  a["feasible"] = analytic.feasible;
  a["within_bounds"] = analytic.within_bounds;
  a["exact_condition_holds"] = analytic.exact_condition_holds;
  a["loss_ratio_mismatch"] = analytic.loss_ratio_mismatch;
  j["analytic"] = a;
  ordered_json m;
  m["x2"] = best.params.x2;
  m["scale_im_alpha2"] = best.params.scale_im_alpha2;
  m["p_normalized"] = best.p_normalized;
  m["evaluations"] = best.evaluations;
  m["converged"] = best.converged;
  m["started_from_analytic"] = best.started_from_analytic;
  j["optimizer"] = m;
  j["feasible"] = analytic.feasible;
  emit(out, j);
  return kExitOk;
}

inline int cmd_adjudicate(const Options& o, std::ostream& out) {
  const auto app = load(o);
  const int f = app.grids.freq_points;
  const std::vector<int> levels{(f + 1) / 2, f, 2 * f - 1};

  ordered_json j;
  j["levels"] = ordered_json::array();
  std::optional<ConventionWinner> common;
  bool stable = true;
  for (const int points : levels) {
    QuadratureGrids g = app.grids;
    g.freq_points = points;
    const auto report = compare_conventions(app.interferometer, g);
    ordered_json level;
    level["freq_points"] = points;
    level["winner"] = to_string(report.winner);
    level["max_rel_dev_single"] = report.max_rel_dev_single;
    level["max_rel_dev_two"] = report.max_rel_dev_two;
    level["table"] = ordered_json::array();
    for (const auto& row : report.rows) {
      ordered_json r;
      r["tau_r"] = row.tau_r;
      r["oracle"] = row.oracle_value;
      r["single"] = row.single_formula_value;
      r["two"] = row.two_formula_value;
      level["table"].push_back(r);
    }
    j["levels"].push_back(level);
    if (!common) common = report.winner;
    stable = stable && *common == report.winner;
  }
  j["winner"] = stable ? to_string(*common) : "unstable";
  j["stable"] = stable;
  emit(out, j);
  return kExitOk;
}

inline std::string one_line(std::string s) {
  for (auto& ch : s)
    if (ch == '\n' || ch == '\r') ch = ' ';
  return s;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-photon interference through lossy dielectrics", "lossyhom"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config_path, "JSON configuration file")->required();
    cmd->add_option("--units", o.units, "Override units: si | natural");
    cmd->add_option("--grids", o.grids, "Oracle grids \"freq_points,time_points,halfwidth_sigmas\"");
  };
  auto* simulate = app.add_subcommand("simulate", "Closed-form coincidence probability (and oracle with --oracle)");
  add_common(simulate);
  simulate->add_flag("--oracle", o.oracle, "Also run the quadrature oracle");
  auto* sweep = app.add_subcommand("sweep", "One-parameter scan written as CSV");
  add_common(sweep);
  sweep->add_flag("--oracle", o.oracle, "Add the oracle engine");
  sweep->add_option("--out", o.out_path, "CSV path (default: stdout)");
  sweep->add_option("--jsonl", o.jsonl_path, "Also write rows as JSON lines");
  auto* tune = app.add_subcommand("tune", "Restore the dark fringe with the arm-2 dielectric");
  add_common(tune);
  tune->add_flag("--oracle", o.oracle, "Use the oracle objective");
  auto* adjudicate = app.add_subcommand("adjudicate", "Compare beta conventions against the oracle");
  add_common(adjudicate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "lossyhom: error[usage]: " << one_line(e.what()) << '\n';
    return kExitConfig;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(o, out);
    if (sweep->parsed()) return cmd_sweep(o, out);
    if (tune->parsed()) return cmd_tune(o, out);
    return cmd_adjudicate(o, out);
  } catch (const ConfigError& e) {
    err << "lossyhom: error[config]: " << one_line(e.what()) << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    err << "lossyhom: error[numeric]: " << one_line(e.what()) << '\n';
    return kExitNumeric;
  }
}

}  // namespace lossyhom::cli
