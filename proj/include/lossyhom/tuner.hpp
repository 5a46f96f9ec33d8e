#pragma once

// Dark-fringe restoration: choose the arm-2 length and/or the strength of its
// linear absorption so that the loss mismatch and the group-delay difference
// both vanish.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lossyhom/closed_form.hpp"
#include "lossyhom/nelder_mead.hpp"
#include "lossyhom/oracle.hpp"
#include "lossyhom/parallel.hpp"

namespace lossyhom {

enum class FreeParam { x2, scale_im_alpha2 };
enum class Objective { closed_form, oracle };

inline const char* to_string(FreeParam p) { return p == FreeParam::x2 ? "x2" : "scale_im_alpha2"; }
inline const char* to_string(Objective o) { return o == Objective::closed_form ? "closed_form" : "oracle"; }

struct ParamBounds {
  FreeParam param = FreeParam::x2;
  double lo = 0.0;
  double hi = 0.0;
};

struct TuneRequest {
  SourceSpec source;
  ArmConfig fixed_arm1;
  ComplexDispersion material2;
  double nominal_x2 = 0.0;  // used when x2 is not free
  std::vector<ParamBounds> free;
  Objective objective = Objective::closed_form;
  BetaConvention beta_convention = BetaConvention::two_formula;
  QuadratureGrids grids;
  bool seed_from_analytic = true;  // start the simplex at the analytic point when it is admissible

  const ParamBounds* bounds_for(FreeParam p) const {
    for (const auto& b : free)
      if (b.param == p) return &b;
    return nullptr;
  }

  void validate() const {
    source.validate();
    fixed_arm1.validate(source, "arm1");
    if (free.empty()) throw ConfigError("tune.free: at least one free parameter is required");
    if (free.size() > 2) throw ConfigError("tune.free: at most two free parameters");
    if (free.size() == 2 && free[0].param == free[1].param) throw ConfigError("tune.free: duplicate parameter");
    for (const auto& b : free) {
      if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || !(b.lo < b.hi))
        throw ConfigError(std::string("tune.bounds.") + to_string(b.param) + ": need finite lo < hi");
      if (b.param == FreeParam::x2 && b.lo < 0.0) throw ConfigError("tune.bounds.x2: lower bound must be >= 0");
      if (b.param == FreeParam::scale_im_alpha2 && b.lo < 0.0)
        throw ConfigError("tune.bounds.scale_im_alpha2: lower bound must be >= 0");
    }
    if (!bounds_for(FreeParam::x2) && (!std::isfinite(nominal_x2) || nominal_x2 < 0.0))
      throw ConfigError("arm2.length: must be finite and >= 0");
    if (objective == Objective::oracle) grids.validate();
  }
};

struct TuneParams {
  double x2 = 0.0;
  double scale_im_alpha2 = 1.0;
};

// Arm-2 medium with Im(alpha2) scaled; not validated here.
inline InterferometerConfig tuned_config(const TuneRequest& req, const TuneParams& p) {
  ComplexDispersion m = req.material2;
  m.alpha = cplx(m.alpha.real(), m.alpha.imag() * p.scale_im_alpha2);
  InterferometerConfig config;
  config.source = req.source;
  config.arm1 = req.fixed_arm1;
  config.arm2 = ArmConfig{p.x2, m};
  config.beta_convention = req.beta_convention;
  return config;
}

struct AnalyticRestore {
  double x2 = 0.0;                  // m
  double scale_im_alpha2 = 1.0;
  double residual_tau_r = 0.0;      // s
  bool feasible = false;            // admissible config and |residual| <= 1e-3 sqrt(effective variance)
  bool within_bounds = false;
  // Im(alpha)/Re(alpha) equal in both media: a pure length change restores
  // both conditions at once.
  bool exact_condition_holds = false;
  double loss_ratio_mismatch = 0.0;  // Im/Re(alpha2) - Im/Re(alpha1)
};

inline AnalyticRestore analytic_restore(const TuneRequest& req) {
  req.validate();
  const auto a1 = req.fixed_arm1.dispersion(req.source).alpha;
  const auto a2 = req.material2.alpha;
  const double x1 = req.fixed_arm1.length;
  if (!(a2.imag() > 0.0)) throw NumericError("tune: material2 has Im(alpha2) <= 0, no absorption to match");

  const auto* bx = req.bounds_for(FreeParam::x2);
  const auto* bs = req.bounds_for(FreeParam::scale_im_alpha2);

  AnalyticRestore out;
  if (bx && bs) {
    if (!(a2.real() > 0.0)) throw NumericError("tune: material2 has Re(alpha2) <= 0, cannot match the group delay");
    out.x2 = x1 * a1.real() / a2.real();
    out.scale_im_alpha2 = out.x2 > 0.0 ? x1 * a1.imag() / (out.x2 * a2.imag()) : 1.0;
  } else if (bx) {
    out.x2 = x1 * a1.imag() / a2.imag();
  } else {
    out.x2 = req.nominal_x2;
    if (!(out.x2 > 0.0)) throw NumericError("tune: arm2.length must be > 0 to solve for scale_im_alpha2");
    out.scale_im_alpha2 = x1 * a1.imag() / (out.x2 * a2.imag());
  }
  out.residual_tau_r = out.x2 * a2.real() - x1 * a1.real();

  const double ratio1 = a1.real() != 0.0 ? a1.imag() / a1.real() : std::numeric_limits<double>::infinity();
  const double ratio2 = a2.real() != 0.0 ? a2.imag() / a2.real() : std::numeric_limits<double>::infinity();
  out.loss_ratio_mismatch = ratio2 - ratio1;
  out.exact_condition_holds = std::abs(out.loss_ratio_mismatch) <= 1e-12 * std::max(std::abs(ratio1), std::abs(ratio2));

  try {
    const auto config = tuned_config(req, {out.x2, out.scale_im_alpha2});
    config.validate();
    const double variance = effective_variance(config);
    out.feasible = std::abs(out.residual_tau_r) <= 1e-3 * std::sqrt(variance);
  } catch (const std::exception&) {
    out.feasible = false;
  }
  out.within_bounds = (!bx || (out.x2 >= bx->lo && out.x2 <= bx->hi)) &&
                      (!bs || (out.scale_im_alpha2 >= bs->lo && out.scale_im_alpha2 <= bs->hi));
  return out;
}

struct TuneResult {
  TuneParams params;
  double p_normalized = 0.0;
  int evaluations = 0;       // grid scan + simplex
  double grid_best = 0.0;    // best coarse-scan value
  bool converged = false;
  bool started_from_analytic = false;
};

namespace detail {

class TuneObjective {
public:
  explicit TuneObjective(const TuneRequest& req) : req_(req) {
    if (req.objective == Objective::oracle) grid_.emplace(req.source, req.grids.freq_points);
  }

  TuneParams params_at(const std::vector<double>& u) const {
    TuneParams p{req_.nominal_x2, 1.0};
    for (std::size_t i = 0; i < req_.free.size(); ++i) {
      const auto& b = req_.free[i];
      const double v = b.lo + u[i] * (b.hi - b.lo);
      (b.param == FreeParam::x2 ? p.x2 : p.scale_im_alpha2) = v;
    }
    return p;
  }

  std::vector<double> unit_of(const TuneParams& p) const {
    std::vector<double> u(req_.free.size());
    for (std::size_t i = 0; i < req_.free.size(); ++i) {
      const auto& b = req_.free[i];
      const double v = b.param == FreeParam::x2 ? p.x2 : p.scale_im_alpha2;
      u[i] = (v - b.lo) / (b.hi - b.lo);
    }
    return u;
  }

  // p_normalized, or +inf where the configuration is not admissible.
  double operator()(const std::vector<double>& u) const {
    try {
      const auto config = tuned_config(req_, params_at(u));
      if (req_.objective == Objective::closed_form) return coincidence_closed_form(config).p_normalized;
      OracleOptions opts;
      opts.with_throughput = false;
      return coincidence_oracle(config, req_.grids, *grid_, opts).p_normalized;
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
  }

private:
  const TuneRequest& req_;
  std::optional<FrequencyGrid> grid_;
};

}  // namespace detail

inline constexpr int kGridScanPoints = 11;

inline TuneResult minimize_coincidence(const TuneRequest& req, const NelderMeadOptions& nm = {}) {
  req.validate();
  const detail::TuneObjective objective(req);
  const std::size_t dims = req.free.size();

  // Coarse scan in lexicographic order; strict < keeps the first minimum.
  std::size_t total = 1;
  for (std::size_t d = 0; d < dims; ++d) total *= kGridScanPoints;
  std::vector<std::vector<double>> nodes(total, std::vector<double>(dims));
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t rem = i;
    for (std::size_t d = dims; d-- > 0;) {
      nodes[i][d] = double(rem % kGridScanPoints) / (kGridScanPoints - 1);
      rem /= kGridScanPoints;
    }
  }
  std::vector<double> scan(total);
  parallel_for(total, [&](std::size_t i) { scan[i] = objective(nodes[i]); });
  std::size_t best = 0;
  for (std::size_t i = 1; i < total; ++i)
    if (scan[i] < scan[best]) best = i;
  if (!std::isfinite(scan[best])) throw NumericError("tune: every grid point in the box is infeasible");

  TuneResult out;
  out.grid_best = scan[best];

  std::vector<double> start = nodes[best];
  if (req.seed_from_analytic) {
    try {
      const auto analytic = analytic_restore(req);
      if (analytic.feasible && analytic.within_bounds) {
        start = objective.unit_of({analytic.x2, analytic.scale_im_alpha2});
        out.started_from_analytic = true;
      }
    } catch (const NumericError&) {
    }
  }

  const auto simplex = nelder_mead_box(objective, start, nm);
  out.evaluations = int(total) + simplex.evaluations;
  out.converged = simplex.converged;
  if (simplex.value <= scan[best]) {
    out.params = objective.params_at(simplex.point);
    out.p_normalized = simplex.value;
  } else {
    out.params = objective.params_at(nodes[best]);
    out.p_normalized = scan[best];
  }
  return out;
}

}  // namespace lossyhom
