#pragma once

// Brute-force coincidence probability by quadrature of the two-photon
// detection amplitude.
//
// With a monochromatic pump the joint amplitude at detection times
// (t_a, t_b), after removing the carrier exp(-i Omega (t_a + t_b) / 2), is
//
//   A(t_a, t_b) = A+(tau) - A-(tau),   tau = t_b - t_a,
//   A+(tau) = int d(delta) H(delta) exp(+i delta tau),
//   A-(tau) = int d(delta) H(delta) exp(-i delta tau),
//   H(delta) = g(delta) P1(Omega/2 + delta) P2(Omega/2 - delta),
//
// where P_j = exp(i k_j x_j) and g is the filtered joint spectral amplitude.
// The bandwidth B describes the joint spectral intensity exp(-delta^2/B^2),
// so g(delta) = exp(-delta^2 / (2 B^2)). A+ and A- are the two
// distinguishable paths; |A+|^2 + |A-|^2 is the no-interference level.
//
// |A|^2 depends on t_a and t_b only through tau, so integrating over the
// centre-of-mass time gives the same detector-window factor for the
// coincidence and the reference integrals. Only the tau integral is
// discretized.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "lossyhom/closed_form.hpp"
#include "lossyhom/fringe_fit.hpp"
#include "lossyhom/optics.hpp"

namespace lossyhom {

struct QuadratureGrids {
  int freq_points = 2049;               // odd, over [Omega/2 - 6B, Omega/2 + 6B]
  int time_points = 513;                // odd, on the tau axis
  double time_halfwidth_sigmas = 8.0;   // in packet widths, beyond the packet centres
  double tolerance = 1e-6;              // under-resolution threshold is 10x this

  void validate() const {
    if (freq_points < 129 || freq_points % 2 == 0)
      throw ConfigError("oracle.freq_points: must be odd and >= 129");
    if (time_points < 65 || time_points % 2 == 0)
      throw ConfigError("oracle.time_points: must be odd and >= 65");
    if (!(time_halfwidth_sigmas >= 5.0) || !std::isfinite(time_halfwidth_sigmas))
      throw ConfigError("oracle.time_halfwidth_sigmas: must be >= 5");
    if (!(tolerance > 0.0) || !std::isfinite(tolerance))
      throw ConfigError("oracle.tolerance: must be > 0");
  }
};

// Detuning nodes with trapezoid weights folded into the source amplitude.
// Reusable across every configuration that shares the source and node count.
class FrequencyGrid {
public:
  FrequencyGrid(const SourceSpec& source, int points) : source_(source), points_(points) {
    const double b = source.bandwidth;
    const double half = kBandHalfWidth * b;
    const double h = 2.0 * half / (points - 1);
    step_ = h;
    detuning_.resize(points);
    weight_.resize(points);
    weight_half_.resize(points);
    for (int j = 0; j < points; ++j) {
      const double delta = -half + h * j;
      const double g = std::exp(-delta * delta / (2.0 * b * b));
      const bool edge = j == 0 || j == points - 1;
      detuning_[j] = delta;
      weight_[j] = (edge ? 0.5 * h : h) * g;
      // Every other node: step 2h, same endpoints since points is odd.
      weight_half_[j] = (j % 2 == 0) ? (edge ? h : 2.0 * h) * g : 0.0;
    }
  }

  bool matches(const SourceSpec& source, int points) const {
    return points == points_ && source.omega_sum == source_.omega_sum && source.bandwidth == source_.bandwidth &&
           source.units == source_.units;
  }

  int points() const { return points_; }
  double step() const { return step_; }
  std::span<const double> detuning() const { return detuning_; }
  std::span<const double> weight() const { return weight_; }
  std::span<const double> weight_half() const { return weight_half_; }

private:
  SourceSpec source_;
  int points_;
  double step_ = 0.0;
  std::vector<double> detuning_;
  std::vector<double> weight_;
  std::vector<double> weight_half_;
};

namespace detail {

// Gaussian shape of H: exp(-s delta^2 - i c delta), s complex.
struct PacketGeometry {
  double tau_r = 0.0;
  double mismatch = 0.0;
  cplx s{};
  double packet_sigma = 0.0;  // sqrt(2 |s|^2 / Re s); 1/B when beta = 0
  double centre_shift = 0.0;  // |m Im s| / Re s

  double halfwidth(double sigmas, double extra_delay) const {
    return std::abs(tau_r + extra_delay) + centre_shift + sigmas * packet_sigma;
  }
};

inline PacketGeometry packet_geometry(const InterferometerConfig& config, bool lossless) {
  const auto d1 = config.dispersion1();
  const auto d2 = config.dispersion2();
  const double x1 = config.arm1.length, x2 = config.arm2.length;
  const double b = config.source.bandwidth;
  const cplx quad = d1.beta * x1 + d2.beta * x2;

  PacketGeometry g;
  g.tau_r = tau_r(config);
  g.mismatch = lossless ? 0.0 : loss_mismatch(config);
  g.s = cplx(1.0 / (2.0 * b * b) + (lossless ? 0.0 : quad.imag()), -quad.real());
  if (!(g.s.real() > 0.0)) {
    std::ostringstream msg;
    msg << "oracle: joint spectrum is not normalizable, Im(beta) too negative (arm1.beta Im = " << d1.beta.imag()
        << ", arm2.beta Im = " << d2.beta.imag() << ")";
    throw NumericError(msg.str());
  }
  g.packet_sigma = std::sqrt(2.0 * std::norm(g.s) / g.s.real());
  g.centre_shift = std::abs(g.mismatch * g.s.imag()) / g.s.real();
  return g;
}

// H(delta) without the constant factor exp(i (k01 x1 + k02 x2)). An extra
// delay in arm 2 adds exp(-i delta extra_delay).
inline std::vector<cplx> joint_spectrum(const InterferometerConfig& config, const FrequencyGrid& grid,
                                        double extra_delay, bool lossless) {
  const auto d1 = config.dispersion1();
  const auto d2 = config.dispersion2();
  const double x1 = config.arm1.length, x2 = config.arm2.length;
  const auto delta = grid.detuning();
  std::vector<cplx> h(delta.size());
  for (std::size_t j = 0; j < delta.size(); ++j) {
    cplx phase = d1.offset(delta[j]) * x1 + d2.offset(-delta[j]) * x2 - cplx(delta[j] * extra_delay, 0.0);
    if (lossless) phase = cplx(phase.real(), 0.0);
    h[j] = std::exp(cplx(-phase.imag(), phase.real()));
  }
  return h;
}

struct PathAmplitudes {
  cplx plus, minus;            // full grid
  cplx plus_half, minus_half;  // every other frequency node
};

inline PathAmplitudes path_amplitudes(std::span<const cplx> spectrum, const FrequencyGrid& grid, double tau) {
  const auto delta = grid.detuning();
  const auto w = grid.weight();
  const auto wh = grid.weight_half();
  double pr = 0, pi = 0, mr = 0, mi = 0;
  double hpr = 0, hpi = 0, hmr = 0, hmi = 0;
  for (std::size_t j = 0; j < delta.size(); ++j) {
    const double c = std::cos(delta[j] * tau);
    const double s = std::sin(delta[j] * tau);
    const double tr = spectrum[j].real(), ti = spectrum[j].imag();
    const double plus_r = tr * c - ti * s, plus_i = tr * s + ti * c;
    const double minus_r = tr * c + ti * s, minus_i = ti * c - tr * s;
    pr += w[j] * plus_r;
    pi += w[j] * plus_i;
    mr += w[j] * minus_r;
    mi += w[j] * minus_i;
    hpr += wh[j] * plus_r;
    hpi += wh[j] * plus_i;
    hmr += wh[j] * minus_r;
    hmi += wh[j] * minus_i;
  }
  return {{pr, pi}, {mr, mi}, {hpr, hpi}, {hmr, hmi}};
}

struct TauIntegrals {
  double coincidence = 0.0;       // int |A+ - A-|^2
  double reference = 0.0;         // int |A+|^2 + |A-|^2
  double coincidence_half = 0.0;  // same on the halved frequency grid
  double reference_half = 0.0;
  double plus_power = 0.0;        // int |A+|^2
};

inline TauIntegrals integrate_tau(std::span<const cplx> spectrum, const FrequencyGrid& grid, double halfwidth,
                                  int time_points) {
  TauIntegrals out;
  const double step = 2.0 * halfwidth / (time_points - 1);
  for (int k = 0; k < time_points; ++k) {
    const double tau = -halfwidth + step * k;
    const double wt = (k == 0 || k == time_points - 1) ? 0.5 * step : step;
    const auto a = path_amplitudes(spectrum, grid, tau);
    out.coincidence += wt * std::norm(a.plus - a.minus);
    out.reference += wt * (std::norm(a.plus) + std::norm(a.minus));
    out.coincidence_half += wt * std::norm(a.plus_half - a.minus_half);
    out.reference_half += wt * (std::norm(a.plus_half) + std::norm(a.minus_half));
    out.plus_power += wt * std::norm(a.plus);
  }
  return out;
}

struct OracleRatio {
  double p = 0.0;
  double p_half = 0.0;
  double plus_power = 0.0;
};

inline OracleRatio oracle_ratio(const InterferometerConfig& config, const FrequencyGrid& grid,
                                const QuadratureGrids& grids, double extra_delay) {
  const auto geometry = packet_geometry(config, false);
  const double halfwidth = geometry.halfwidth(grids.time_halfwidth_sigmas, extra_delay);
  // A(tau) from a uniform frequency grid repeats every 2 pi / step; a window
  // longer than that folds shifted copies of the packet back in, and the
  // halved grid aliases at the same delays so the comparison below misses it.
  const double period = 2.0 * std::numbers::pi / grid.step();
  if (2.0 * halfwidth >= period) {
    std::ostringstream msg;
    msg << "oracle: under-resolved quadrature, time window " << 2.0 * halfwidth
        << " exceeds the frequency-grid alias period " << period << "; increase freq_points";
    throw NumericError(msg.str());
  }
  const auto spectrum = joint_spectrum(config, grid, extra_delay, false);
  const auto t = integrate_tau(spectrum, grid, halfwidth, grids.time_points);
  if (!(t.reference > 0.0) || !(t.reference_half > 0.0))
    throw NumericError("oracle: no-interference level underflowed to zero");
  const OracleRatio r{t.coincidence / t.reference, t.coincidence_half / t.reference_half, t.plus_power};
  if (std::abs(r.p - r.p_half) > 10.0 * grids.tolerance) {
    std::ostringstream msg;
    msg << "oracle: under-resolved quadrature, halving freq_points moves p by " << std::abs(r.p - r.p_half)
        << " (limit " << 10.0 * grids.tolerance << ")";
    throw NumericError(msg.str());
  }
  return r;
}

}  // namespace detail

// A(t_a, t_b) including the constant propagation factor exp(i (k01 x1 + k02 x2)).
inline cplx biphoton_amplitude(const InterferometerConfig& config, double t_a, double t_b, int freq_points = 2049) {
  config.validate();
  QuadratureGrids grids;
  grids.freq_points = freq_points;
  grids.validate();
  const FrequencyGrid grid(config.source, freq_points);
  const auto spectrum = detail::joint_spectrum(config, grid, 0.0, false);
  const auto a = detail::path_amplitudes(spectrum, grid, t_b - t_a);
  const cplx carrier_phase = config.dispersion1().k0 * config.arm1.length + config.dispersion2().k0 * config.arm2.length;
  return std::exp(cplx(0.0, 1.0) * carrier_phase) * (a.plus - a.minus);
}

struct OracleOptions {
  bool with_throughput = true;
  // Back-solve visibility and effective variance from a Gaussian fit to a
  // tau_r scan instead of reporting the closed-form companion values.
  bool fit_width = false;
  int fit_points = 21;
  double fit_span_sigmas = 2.5;
};

// Oracle evaluation with a caller-owned frequency grid (reused across sweep
// rows and optimizer steps).
inline CoincidenceResult coincidence_oracle(const InterferometerConfig& config, const QuadratureGrids& grids,
                                            const FrequencyGrid& grid, const OracleOptions& options = {}) {
  config.validate();
  grids.validate();
  if (!grid.matches(config.source, grids.freq_points))
    throw ConfigError("oracle: frequency grid does not match the configuration source");

  const auto ratio = detail::oracle_ratio(config, grid, grids, 0.0);

  CoincidenceResult r;
  r.p_normalized = ratio.p;
  r.tau_r = tau_r(config);
  const double variance = effective_variance(config);
  const double mismatch = loss_mismatch(config);
  r.effective_variance = variance;
  r.visibility = std::exp(-mismatch * mismatch / variance);
  r.throughput = throughput_estimate(config);

  if (options.with_throughput) {
    const auto lossy = detail::packet_geometry(config, false);
    const auto lossless = detail::packet_geometry(config, true);
    const double halfwidth = std::max(lossy.halfwidth(grids.time_halfwidth_sigmas, 0.0),
                                      lossless.halfwidth(grids.time_halfwidth_sigmas, 0.0));
    const auto lossy_spec = detail::joint_spectrum(config, grid, 0.0, false);
    const auto clean_spec = detail::joint_spectrum(config, grid, 0.0, true);
    const double lossy_power = detail::integrate_tau(lossy_spec, grid, halfwidth, grids.time_points).plus_power;
    const double clean_power = detail::integrate_tau(clean_spec, grid, halfwidth, grids.time_points).plus_power;
    const double constant_loss = config.dispersion1().k0.imag() * config.arm1.length +
                                 config.dispersion2().k0.imag() * config.arm2.length;
    r.throughput = std::exp(-2.0 * constant_loss) * lossy_power / clean_power;
  }

  if (options.fit_width) {
    if (options.fit_points < 7) throw ConfigError("oracle: fit_points must be >= 7");
    const double sigma = std::sqrt(variance);
    std::vector<FringeSample> samples(options.fit_points);
    for (int i = 0; i < options.fit_points; ++i) {
      const double u = -1.0 + 2.0 * i / (options.fit_points - 1);
      const double delay = -r.tau_r + u * options.fit_span_sigmas * sigma;
      const auto scan = detail::oracle_ratio(config, grid, grids, delay);
      samples[i] = {delay, r.tau_r + delay, scan.p};
    }
    const auto fit = fit_fringe_width(samples);
    r.effective_variance = fit.sigma_sq;
    r.visibility = fit.visibility;
  }
  return r;
}

inline CoincidenceResult coincidence_oracle(const InterferometerConfig& config, const QuadratureGrids& grids = {},
                                            const OracleOptions& options = {}) {
  grids.validate();
  config.source.validate();
  const FrequencyGrid grid(config.source, grids.freq_points);
  return coincidence_oracle(config, grids, grid, options);
}

enum class ConventionWinner { single_formula, two_formula, tie, indeterminate };

inline const char* to_string(ConventionWinner w) {
  switch (w) {
    case ConventionWinner::single_formula: return "single";
    case ConventionWinner::two_formula: return "two";
    case ConventionWinner::tie: return "tie";
    case ConventionWinner::indeterminate: return "indeterminate";
  }
  return "?";
}

struct ConventionRow {
  double tau_r = 0.0;
  double oracle_value = 0.0;
  double single_formula_value = 0.0;
  double two_formula_value = 0.0;
};

struct ConventionReport {
  std::vector<ConventionRow> rows;
  double max_rel_dev_single = 0.0;
  double max_rel_dev_two = 0.0;
  ConventionWinner winner = ConventionWinner::tie;
  int freq_points = 0;
};

inline constexpr double kIndeterminateDeviation = 0.05;

// Scans tau_r by moving the vacuum arm 2 and compares the oracle with both
// closed-form conventions.
inline ConventionReport compare_conventions(const InterferometerConfig& config, const QuadratureGrids& grids = {},
                                            int tau_points = 11, double span_sigmas = 2.5) {
  config.validate();
  grids.validate();
  if (!config.arm2.is_vacuum()) throw ConfigError("adjudicate: arm2 must be vacuum");
  if (config.dispersion1().beta.imag() < 0.0) throw ConfigError("adjudicate: arm1 Im(beta) must be >= 0");
  if (tau_points < 11) throw ConfigError("adjudicate: need at least 11 tau_r points");

  const FrequencyGrid grid(config.source, grids.freq_points);
  const double sigma = 1.0 / config.source.bandwidth;
  const double c = config.source.c();

  ConventionReport report;
  report.freq_points = grids.freq_points;
  report.rows.resize(tau_points);
  bool identical = true;
  for (int i = 0; i < tau_points; ++i) {
    const double u = -1.0 + 2.0 * i / (tau_points - 1);
    InterferometerConfig scan = config;
    scan.arm2.length = config.arm2.length + u * span_sigmas * sigma * c;
    if (scan.arm2.length < 0.0)
      throw ConfigError("adjudicate: arm2.length too short for the tau_r scan");

    OracleOptions opts;
    opts.with_throughput = false;
    ConventionRow& row = report.rows[i];
    row.tau_r = tau_r(scan);
    row.oracle_value = coincidence_oracle(scan, grids, grid, opts).p_normalized;
    scan.beta_convention = BetaConvention::single_formula;
    row.single_formula_value = coincidence_closed_form(scan).p_normalized;
    scan.beta_convention = BetaConvention::two_formula;
    row.two_formula_value = coincidence_closed_form(scan).p_normalized;

    const double scale = std::max(std::abs(row.oracle_value), 1e-12);
    report.max_rel_dev_single = std::max(report.max_rel_dev_single,
                                         std::abs(row.single_formula_value - row.oracle_value) / scale);
    report.max_rel_dev_two = std::max(report.max_rel_dev_two, std::abs(row.two_formula_value - row.oracle_value) / scale);
    identical = identical && row.single_formula_value == row.two_formula_value;
  }

  if (identical || report.max_rel_dev_single == report.max_rel_dev_two)
    report.winner = ConventionWinner::tie;
  else if (report.max_rel_dev_single > kIndeterminateDeviation && report.max_rel_dev_two > kIndeterminateDeviation)
    report.winner = ConventionWinner::indeterminate;
  else
    report.winner = report.max_rel_dev_single < report.max_rel_dev_two ? ConventionWinner::single_formula
                                                                       : ConventionWinner::two_formula;
  return report;
}

}  // namespace lossyhom
