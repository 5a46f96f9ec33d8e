#pragma once

// Strict JSON configuration. Shape:
//
// { "source": {"omega_sum": n, "bandwidth": n},
//   "arm1": {"length": n, "medium": "vacuum"
//                                  | {"k0": [re, im], "alpha": [re, im], "beta": [re, im]}
//                                  | {"lorentz": {"plasma_freq": n, "resonance_freq": n, "damping": n}}},
//   "arm2": { same },
//   "beta_convention": "single" | "two",
//   "units": "si" | "natural",
//   "oracle": {"freq_points": i, "time_points": i, "time_halfwidth_sigmas": n, "tolerance": n},
//   "sweep": {"parameter": s, "start": n, "stop": n, "steps": i, "engines": ["closed_form", "oracle"]},
//   "tune": {"free": ["x2", "scale_im_alpha2"], "bounds": {"x2": [lo, hi], ...},
//            "objective": "closed_form" | "oracle"} }
//
// Unknown keys are rejected with the offending key path.

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "lossyhom/closed_form.hpp"
#include "lossyhom/oracle.hpp"
#include "lossyhom/sweep.hpp"
#include "lossyhom/tuner.hpp"

namespace lossyhom {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

struct TuneSpec {
  std::vector<ParamBounds> free;
  Objective objective = Objective::closed_form;
};

struct AppConfig {
  InterferometerConfig interferometer;
  QuadratureGrids grids;
  std::optional<SweepSpec> sweep;
  std::optional<TuneSpec> tune;
};

namespace detail {

inline void require_object(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items())
    if (!ok.count(key)) throw ConfigError((where.empty() ? key : where + "." + key) + ": unknown key");
}

inline const json& member(const json& j, const std::string& where, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError((where.empty() ? std::string(key) : where + "." + key) + ": missing");
  return *it;
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  return j.get<double>();
}

inline int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return j.get<int>();
}

inline std::string text(const json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + ": expected a string");
  return j.get<std::string>();
}

inline cplx complex_pair(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(where + ": expected [re, im]");
  return {number(j[0], where + "[0]"), number(j[1], where + "[1]")};
}

inline Medium parse_medium(const json& j, const SourceSpec& source, const std::string& where) {
  if (j.is_string()) {
    if (j.get<std::string>() != "vacuum") throw ConfigError(where + ": expected \"vacuum\" or an object");
    return Vacuum{};
  }
  if (!j.is_object()) throw ConfigError(where + ": expected \"vacuum\" or an object");
  if (j.contains("lorentz")) {
    require_object(j, where, {"lorentz"});
    const std::string w = where + ".lorentz";
    const json& l = j.at("lorentz");
    require_object(l, w, {"plasma_freq", "resonance_freq", "damping"});
    LorentzOscillator osc{number(member(l, w, "plasma_freq"), w + ".plasma_freq"),
                          number(member(l, w, "resonance_freq"), w + ".resonance_freq"),
                          number(member(l, w, "damping"), w + ".damping")};
    try {
      return lorentz_to_dispersion(osc, source);
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  require_object(j, where, {"k0", "alpha", "beta"});
  return ComplexDispersion{complex_pair(member(j, where, "k0"), where + ".k0"),
                           complex_pair(member(j, where, "alpha"), where + ".alpha"),
                           complex_pair(member(j, where, "beta"), where + ".beta")};
}

inline ArmConfig parse_arm(const json& j, const SourceSpec& source, const std::string& where) {
  require_object(j, where, {"length", "medium"});
  return {number(member(j, where, "length"), where + ".length"),
          parse_medium(member(j, where, "medium"), source, where + ".medium")};
}

inline QuadratureGrids parse_grids(const json& j) {
  const std::string w = "oracle";
  require_object(j, w, {"freq_points", "time_points", "time_halfwidth_sigmas", "tolerance"});
  QuadratureGrids g;
  if (j.contains("freq_points")) g.freq_points = integer(j.at("freq_points"), w + ".freq_points");
  if (j.contains("time_points")) g.time_points = integer(j.at("time_points"), w + ".time_points");
  if (j.contains("time_halfwidth_sigmas"))
    g.time_halfwidth_sigmas = number(j.at("time_halfwidth_sigmas"), w + ".time_halfwidth_sigmas");
  if (j.contains("tolerance")) g.tolerance = number(j.at("tolerance"), w + ".tolerance");
  g.validate();
  return g;
}

inline SweepSpec parse_sweep(const json& j) {
  const std::string w = "sweep";
  require_object(j, w, {"parameter", "start", "stop", "steps", "engines"});
  SweepSpec s;
  s.parameter = text(member(j, w, "parameter"), w + ".parameter");
  s.start = number(member(j, w, "start"), w + ".start");
  s.stop = number(member(j, w, "stop"), w + ".stop");
  s.steps = integer(member(j, w, "steps"), w + ".steps");
  if (j.contains("engines")) {
    const json& e = j.at("engines");
    if (!e.is_array() || e.empty()) throw ConfigError(w + ".engines: expected a non-empty array");
    s.closed_form = s.oracle = false;
    for (const auto& name : e) {
      const auto n = text(name, w + ".engines");
      if (n == "closed_form") s.closed_form = true;
      else if (n == "oracle") s.oracle = true;
      else throw ConfigError(w + ".engines: unknown engine \"" + n + "\"");
    }
  }
  if (s.steps < 2) throw ConfigError(w + ".steps: must be >= 2");
  return s;
}

inline TuneSpec parse_tune(const json& j) {
  const std::string w = "tune";
  require_object(j, w, {"free", "bounds", "objective"});
  TuneSpec t;
  const json& free = member(j, w, "free");
  const json& bounds = member(j, w, "bounds");
  if (!free.is_array() || free.empty()) throw ConfigError(w + ".free: expected a non-empty array");
  require_object(bounds, w + ".bounds", {"x2", "scale_im_alpha2"});
  for (const auto& name : free) {
    const auto n = text(name, w + ".free");
    FreeParam p;
    if (n == "x2") p = FreeParam::x2;
    else if (n == "scale_im_alpha2") p = FreeParam::scale_im_alpha2;
    else throw ConfigError(w + ".free: unknown parameter \"" + n + "\"");
    const json& range = member(bounds, w + ".bounds", n.c_str());
    if (!range.is_array() || range.size() != 2) throw ConfigError(w + ".bounds." + n + ": expected [lo, hi]");
    t.free.push_back({p, number(range[0], w + ".bounds." + n), number(range[1], w + ".bounds." + n)});
  }
  if (j.contains("objective")) {
    const auto o = text(j.at("objective"), w + ".objective");
    if (o == "closed_form") t.objective = Objective::closed_form;
    else if (o == "oracle") t.objective = Objective::oracle;
    else throw ConfigError(w + ".objective: expected \"closed_form\" or \"oracle\"");
  }
  return t;
}

}  // namespace detail

inline Units parse_units(const std::string& s, const std::string& where = "units") {
  if (s == "si") return Units::si;
  if (s == "natural") return Units::natural;
  throw ConfigError(where + ": expected \"si\" or \"natural\"");
}

inline AppConfig parse_config(const json& j, std::optional<Units> units_override = std::nullopt) {
  using namespace detail;
  require_object(j, "", {"source", "arm1", "arm2", "beta_convention", "units", "oracle", "sweep", "tune"});
  AppConfig app;
  auto& cfg = app.interferometer;

  Units units = Units::si;
  if (j.contains("units")) units = parse_units(text(j.at("units"), "units"));
  if (units_override) units = *units_override;

  const json& src = member(j, "", "source");
  require_object(src, "source", {"omega_sum", "bandwidth"});
  cfg.source.omega_sum = number(member(src, "source", "omega_sum"), "source.omega_sum");
  cfg.source.bandwidth = number(member(src, "source", "bandwidth"), "source.bandwidth");
  cfg.source.units = units;
  cfg.source.validate();

  cfg.arm1 = parse_arm(member(j, "", "arm1"), cfg.source, "arm1");
  cfg.arm2 = parse_arm(member(j, "", "arm2"), cfg.source, "arm2");

  if (j.contains("beta_convention")) {
    const auto c = text(j.at("beta_convention"), "beta_convention");
    if (c == "single") cfg.beta_convention = BetaConvention::single_formula;
    else if (c == "two") cfg.beta_convention = BetaConvention::two_formula;
    else throw ConfigError("beta_convention: expected \"single\" or \"two\"");
  }
  cfg.validate();

  if (j.contains("oracle")) app.grids = parse_grids(j.at("oracle"));
  if (j.contains("sweep")) app.sweep = parse_sweep(j.at("sweep"));
  if (j.contains("tune")) app.tune = parse_tune(j.at("tune"));
  if (app.sweep) app.sweep->grids = app.grids;
  return app;
}

inline AppConfig load_config(const std::string& path, std::optional<Units> units_override = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open \"" + path + "\"");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return parse_config(j, units_override);
}

inline TuneRequest make_tune_request(const AppConfig& app) {
  if (!app.tune) throw ConfigError("tune: missing");
  const auto& cfg = app.interferometer;
  TuneRequest req;
  req.source = cfg.source;
  req.fixed_arm1 = cfg.arm1;
  req.material2 = cfg.arm2.dispersion(cfg.source);
  req.nominal_x2 = cfg.arm2.length;
  req.free = app.tune->free;
  req.objective = app.tune->objective;
  req.beta_convention = cfg.beta_convention;
  req.grids = app.grids;
  return req;
}

inline ordered_json to_json(const CoincidenceResult& r) {
  ordered_json j;
  j["p_normalized"] = r.p_normalized;
  j["visibility"] = r.visibility;
  j["tau_r"] = r.tau_r;
  j["effective_variance"] = r.effective_variance;
  j["throughput"] = r.throughput;
  return j;
}

}  // namespace lossyhom
