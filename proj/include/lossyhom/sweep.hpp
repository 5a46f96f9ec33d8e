#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lossyhom/closed_form.hpp"
#include "lossyhom/fringe_fit.hpp"
#include "lossyhom/oracle.hpp"
#include "lossyhom/parallel.hpp"

namespace lossyhom {

enum class Engine { closed_form, oracle };

struct SweepSpec {
  std::string parameter;  // e.g. "arm2.length", "arm1.alpha.im", "source.bandwidth"
  double start = 0.0;
  double stop = 0.0;      // inclusive
  int steps = 2;
  bool closed_form = true;
  bool oracle = false;
  QuadratureGrids grids;
};

struct SweepRow {
  double param_value = 0.0;
  std::optional<double> tau_r;
  std::optional<double> p_closed;
  std::optional<double> p_oracle;
  std::optional<double> visibility;
  std::optional<double> throughput;
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

// Writes `value` into the field named by `path`. Paths:
//   source.bandwidth | source.omega_sum
//   arm{1,2}.length
//   arm{1,2}.{k0,alpha,beta}.{re,im}   (dielectric arms only)
inline InterferometerConfig apply_parameter(InterferometerConfig config, const std::string& path, double value) {
  auto fail = [&](const std::string& why) { throw ConfigError("sweep.parameter \"" + path + "\": " + why); };
  if (path == "source.bandwidth") {
    config.source.bandwidth = value;
    return config;
  }
  if (path == "source.omega_sum") {
    config.source.omega_sum = value;
    return config;
  }
  if (path.size() < 5 || path.compare(0, 3, "arm") != 0 || (path[3] != '1' && path[3] != '2') || path[4] != '.')
    fail("unknown parameter path");
  ArmConfig& arm = path[3] == '1' ? config.arm1 : config.arm2;
  const std::string rest = path.substr(5);
  if (rest == "length") {
    arm.length = value;
    return config;
  }
  auto* d = std::get_if<ComplexDispersion>(&arm.medium);
  const auto dot = rest.find('.');
  if (dot == std::string::npos) fail("unknown parameter path");
  const std::string coef = rest.substr(0, dot), part = rest.substr(dot + 1);
  cplx* target = nullptr;
  if (coef == "k0") target = d ? &d->k0 : nullptr;
  else if (coef == "alpha") target = d ? &d->alpha : nullptr;
  else if (coef == "beta") target = d ? &d->beta : nullptr;
  else fail("unknown dispersion coefficient");
  if (!target) fail("arm medium is vacuum; only length can be swept");
  if (part == "re") *target = cplx(value, target->imag());
  else if (part == "im") *target = cplx(target->real(), value);
  else fail("expected .re or .im");
  return config;
}

inline std::vector<double> sweep_values(const SweepSpec& spec) {
  if (spec.steps < 2) throw ConfigError("sweep.steps: must be >= 2");
  if (!std::isfinite(spec.start) || !std::isfinite(spec.stop) || spec.start == spec.stop)
    throw ConfigError("sweep: start and stop must be finite and distinct");
  // Nodes from the sorted endpoints so a reversed scan hits identical values.
  const double lo = std::min(spec.start, spec.stop), hi = std::max(spec.start, spec.stop);
  std::vector<double> values(spec.steps);
  for (int i = 0; i < spec.steps; ++i) {
    const double t = double(i) / (spec.steps - 1);
    values[i] = i == spec.steps - 1 ? hi : lo + t * (hi - lo);
  }
  return values;
}

inline std::string describe_failure(const std::exception& e) {
  std::string kind = dynamic_cast<const ConfigError*>(&e) ? "error[config]: " : "error[numeric]: ";
  std::string msg = kind + e.what();
  std::replace(msg.begin(), msg.end(), ',', ';');
  std::replace(msg.begin(), msg.end(), '\n', ' ');
  std::replace(msg.begin(), msg.end(), '"', '\'');
  return msg;
}

inline std::vector<SweepRow> run_sweep(const InterferometerConfig& base, const SweepSpec& spec) {
  if (!spec.closed_form && !spec.oracle) throw ConfigError("sweep.engines: at least one engine is required");
  if (spec.oracle) spec.grids.validate();
  const auto values = sweep_values(spec);
  apply_parameter(base, spec.parameter, values.front());  // resolve the path up front

  std::optional<FrequencyGrid> grid;
  const bool source_fixed = spec.parameter.rfind("source.", 0) != 0;
  if (spec.oracle && source_fixed) {
    base.source.validate();
    grid.emplace(base.source, spec.grids.freq_points);
  }

  std::vector<SweepRow> rows(values.size());
  parallel_for(values.size(), [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.param_value = values[i];
    try {
      const auto config = apply_parameter(base, spec.parameter, values[i]);
      config.validate();
      row.tau_r = tau_r(config);
      const auto closed = coincidence_closed_form(config);
      row.visibility = closed.visibility;
      row.throughput = closed.throughput;
      if (spec.closed_form) row.p_closed = closed.p_normalized;
      if (spec.oracle) {
        OracleOptions opts;
        opts.with_throughput = false;
        row.p_oracle = grid ? coincidence_oracle(config, spec.grids, *grid, opts).p_normalized
                            : coincidence_oracle(config, spec.grids, opts).p_normalized;
      }
    } catch (const std::exception& e) {
      row.status = describe_failure(e);
    }
  });
  return rows;
}

inline FringeFit fit_fringe_width(const std::vector<SweepRow>& rows, Engine engine) {
  std::vector<FringeSample> samples;
  for (const auto& row : rows) {
    const auto& p = engine == Engine::oracle ? row.p_oracle : row.p_closed;
    if (!row.ok() || !p || !row.tau_r) continue;
    samples.push_back({row.param_value, *row.tau_r, *p});
  }
  return fit_fringe_width(samples);
}

// Shortest decimal that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline constexpr const char* kCsvHeader = "param_value,tau_r_s,p_closed,p_oracle,visibility,throughput,status";

inline void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << format_double(r.param_value) << ',' << cell(r.tau_r) << ',' << cell(r.p_closed) << ','
        << cell(r.p_oracle) << ',' << cell(r.visibility) << ',' << cell(r.throughput) << ',' << r.status << '\n';
  }
}

inline void write_jsonl(std::ostream& out, const std::vector<SweepRow>& rows) {
  auto field = [](const char* key, const std::optional<double>& v) {
    return std::string("\"") + key + "\":" + (v ? format_double(*v) : std::string("null"));
  };
  for (const auto& r : rows) {
    out << "{\"param_value\":" << format_double(r.param_value) << ',' << field("tau_r_s", r.tau_r) << ','
        << field("p_closed", r.p_closed) << ',' << field("p_oracle", r.p_oracle) << ','
        << field("visibility", r.visibility) << ',' << field("throughput", r.throughput) << ",\"status\":\""
        << r.status << "\"}\n";
  }
}

}  // namespace lossyhom
