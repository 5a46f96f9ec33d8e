#pragma once

// Domain types shared by every engine: the down-conversion source, the
// complex dispersion of a medium about the degenerate frequency, and the two
// interferometer arms. All quantities are SI (m, s, rad/s) unless the source
// is tagged with natural units, in which case c = 1.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <variant>

#include "lossyhom/errors.hpp"

namespace lossyhom {

using cplx = std::complex<double>;

enum class Units { si, natural };

inline constexpr double kSpeedOfLightSI = 299792458.0;

// Half-width of the source band in units of the bandwidth B. The filtered
// spectral intensity there is exp(-36).
inline constexpr double kBandHalfWidth = 6.0;

// Minimum ratio (Omega/2) / B.
inline constexpr double kNarrowBandRatio = 8.0;

inline double speed_of_light(Units units) {
  return units == Units::si ? kSpeedOfLightSI : 1.0;
}

inline const char* to_string(Units units) {
  return units == Units::si ? "si" : "natural";
}

struct SourceSpec {
  double omega_sum = 0.0;  // Omega, rad/s
  double bandwidth = 0.0;  // B, rad/s
  Units units = Units::si;

  double center() const { return 0.5 * omega_sum; }
  double c() const { return speed_of_light(units); }
  double band_lo() const { return center() - kBandHalfWidth * bandwidth; }
  double band_hi() const { return center() + kBandHalfWidth * bandwidth; }
  double inverse_bandwidth_sq() const { return 1.0 / (bandwidth * bandwidth); }

  void validate() const {
    if (!std::isfinite(omega_sum) || !std::isfinite(bandwidth))
      throw ConfigError("source: omega_sum and bandwidth must be finite");
    if (!(bandwidth > 0.0))
      throw ConfigError("source.bandwidth: must be > 0");
    if (!(center() >= kNarrowBandRatio * bandwidth))
      throw ConfigError("source.omega_sum: narrow-band condition omega_sum/2 >= 8*bandwidth violated");
  }

  static SourceSpec make(double omega_sum, double bandwidth, Units units = Units::si) {
    SourceSpec s{omega_sum, bandwidth, units};
    s.validate();
    return s;
  }

  // Dimensionless preset: c = 1, B = 1, Omega = 20.
  static SourceSpec natural_preset() { return make(20.0, 1.0, Units::natural); }
};

// Expansion of k(omega) about Omega/2:
//   k(omega) = k0 + alpha (omega - Omega/2) + beta (omega - Omega/2)^2.
// Imaginary parts are amplitude attenuation and its linear/quadratic
// frequency dependence.
struct ComplexDispersion {
  cplx k0{};     // 1/m
  cplx alpha{};  // s/m
  cplx beta{};   // s^2/m

  // k(Omega/2 + delta) - k0.
  cplx offset(double delta) const { return delta * (alpha + beta * delta); }

  bool operator==(const ComplexDispersion&) const = default;
};

inline ComplexDispersion make_vacuum_dispersion(const SourceSpec& source) {
  const double c = source.c();
  return {cplx(source.center() / c, 0.0), cplx(1.0 / c, 0.0), cplx(0.0, 0.0)};
}

inline cplx wavevector_at(const ComplexDispersion& d, const SourceSpec& source, double omega) {
  if (!(omega > 0.0))
    throw NumericError("wavevector_at: omega must be > 0");
  return d.k0 + d.offset(omega - source.center());
}

// Exact minimum of Im k(omega) over the source band (Im k is a quadratic in
// the detuning, so the endpoints and the vertex suffice).
inline double min_im_wavevector_on_band(const ComplexDispersion& d, const SourceSpec& source) {
  const double half = kBandHalfWidth * source.bandwidth;
  auto im_k = [&](double delta) { return d.k0.imag() + d.offset(delta).imag(); };
  double lowest = std::min(im_k(-half), im_k(half));
  const double curvature = d.beta.imag();
  if (curvature != 0.0) {
    const double vertex = -d.alpha.imag() / (2.0 * curvature);
    if (std::abs(vertex) <= half) lowest = std::min(lowest, im_k(vertex));
  }
  return lowest;
}

inline double max_abs_wavevector_on_band(const ComplexDispersion& d, const SourceSpec& source) {
  const double half = kBandHalfWidth * source.bandwidth;
  double largest = std::abs(d.k0);
  constexpr int kSamples = 24;
  for (int i = 0; i <= kSamples; ++i) {
    const double delta = -half + 2.0 * half * i / kSamples;
    largest = std::max(largest, std::abs(d.k0 + d.offset(delta)));
  }
  return largest;
}

// Passive media only: Im k >= 0 across the band, up to rounding.
inline void check_passive(const ComplexDispersion& d, const SourceSpec& source, const std::string& where) {
  auto finite = [](cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); };
  if (!finite(d.k0) || !finite(d.alpha) || !finite(d.beta))
    throw ConfigError(where + ": dispersion coefficients must be finite");
  const double lowest = min_im_wavevector_on_band(d, source);
  if (lowest < -1e-12 * max_abs_wavevector_on_band(d, source))
    throw ConfigError(where + ": Im k(omega) < 0 on the source band (medium would amplify)");
}

struct Vacuum {
  bool operator==(const Vacuum&) const = default;
};

using Medium = std::variant<Vacuum, ComplexDispersion>;

struct ArmConfig {
  double length = 0.0;  // m
  Medium medium = Vacuum{};

  bool is_vacuum() const { return std::holds_alternative<Vacuum>(medium); }

  ComplexDispersion dispersion(const SourceSpec& source) const {
    if (const auto* d = std::get_if<ComplexDispersion>(&medium)) return *d;
    return make_vacuum_dispersion(source);
  }

  void validate(const SourceSpec& source, const std::string& name) const {
    if (!std::isfinite(length) || length < 0.0)
      throw ConfigError(name + ".length: must be finite and >= 0");
    if (const auto* d = std::get_if<ComplexDispersion>(&medium))
      check_passive(*d, source, name + ".medium");
  }
};

// Denominator convention of the fringe exponents when Im(beta) != 0:
//   single_formula: B^-2 + 2 x1 Im(beta1)   (arm 2 must be vacuum)
//   two_formula:    B^-2 + x1 Im(beta1) + x2 Im(beta2)
enum class BetaConvention { single_formula, two_formula };

inline const char* to_string(BetaConvention convention) {
  return convention == BetaConvention::single_formula ? "single" : "two";
}

struct InterferometerConfig {
  SourceSpec source;
  ArmConfig arm1;
  ArmConfig arm2;
  BetaConvention beta_convention = BetaConvention::two_formula;

  ComplexDispersion dispersion1() const { return arm1.dispersion(source); }
  ComplexDispersion dispersion2() const { return arm2.dispersion(source); }

  void validate() const {
    source.validate();
    arm1.validate(source, "arm1");
    arm2.validate(source, "arm2");
    if (beta_convention == BetaConvention::single_formula && !arm2.is_vacuum())
      throw ConfigError("beta_convention: \"single\" requires a vacuum arm2");
  }
};

struct CoincidenceResult {
  double p_normalized = 0.0;        // P_c over the no-interference level
  double visibility = 1.0;          // loss-mismatch suppression factor
  double tau_r = 0.0;               // s
  double effective_variance = 0.0;  // s^2
  double throughput = 1.0;          // pair survival relative to lossless arms
};

// Single-oscillator Lorentz permittivity eps = 1 + wp^2 / (wr^2 - w^2 - i g w).
struct LorentzOscillator {
  double plasma_freq = 0.0;     // rad/s
  double resonance_freq = 0.0;  // rad/s
  double damping = 0.0;         // rad/s
};

// Refractive index on the passive branch (Im n >= 0).
template <typename Real>
std::complex<Real> lorentz_index(const LorentzOscillator& osc, Real omega) {
  using C = std::complex<Real>;
  const Real wp = osc.plasma_freq, wr = osc.resonance_freq, g = osc.damping;
  const C denom(wr * wr - omega * omega, -g * omega);
  C n = std::sqrt(C(1) + C(wp * wp) / denom);
  if (n.imag() < 0) n = -n;
  return n;
}

template <typename Real>
std::complex<Real> lorentz_wavevector(const LorentzOscillator& osc, Real omega, Real c) {
  return omega * lorentz_index<Real>(osc, omega) / c;
}

// Fits the quadratic expansion to the Lorentz k(omega) by central finite
// differences with the given step. Computed in long double: the
// second difference cancels about six digits at h = B/10.
inline ComplexDispersion lorentz_to_dispersion(const LorentzOscillator& osc, const SourceSpec& source,
                                               double step) {
  source.validate();
  if (!(osc.resonance_freq > 0.0) || !std::isfinite(osc.resonance_freq))
    throw ConfigError("lorentz.resonance_freq: must be > 0");
  if (!(osc.damping >= 0.0) || !std::isfinite(osc.damping))
    throw ConfigError("lorentz.damping: must be >= 0");
  if (!(osc.plasma_freq >= 0.0) || !std::isfinite(osc.plasma_freq))
    throw ConfigError("lorentz.plasma_freq: must be >= 0");
  if (!(step > 0.0)) throw ConfigError("lorentz: finite-difference step must be > 0");

  const double center = source.center();
  if (std::abs(center - osc.resonance_freq) <= 10.0 * osc.damping)
    throw ConfigError("lorentz: source center is within 10*damping of resonance_freq (near-resonance)");
  if (osc.damping == 0.0 && osc.plasma_freq > 0.0 && osc.resonance_freq >= source.band_lo() &&
      osc.resonance_freq <= source.band_hi())
    throw ConfigError("lorentz: undamped resonance lies inside the source band");

  using LD = long double;
  const LD c = source.c();
  auto k = [&](LD w) { return lorentz_wavevector<LD>(osc, w, c); };

  constexpr int kSamples = 240;
  for (int i = 0; i <= kSamples; ++i) {
    const LD w = source.band_lo() + (source.band_hi() - source.band_lo()) * LD(i) / kSamples;
    const auto kw = k(w);
    if (!std::isfinite(static_cast<double>(kw.real())) || kw.imag() < 0)
      throw ConfigError("lorentz: Im k(omega) < 0 or non-finite on the source band");
  }

  const LD w0 = center, h = step;
  const auto kp = k(w0 + h), k0 = k(w0), km = k(w0 - h);
  const auto alpha = (kp - km) / (LD(2) * h);
  const auto beta = (kp - LD(2) * k0 + km) / (LD(2) * h * h);

  ComplexDispersion d{cplx(double(k0.real()), double(k0.imag())), cplx(double(alpha.real()), double(alpha.imag())),
                      cplx(double(beta.real()), double(beta.imag()))};
  check_passive(d, source, "lorentz");
  return d;
}

// Default step h = B/10.
inline ComplexDispersion lorentz_to_dispersion(const LorentzOscillator& osc, const SourceSpec& source) {
  return lorentz_to_dispersion(osc, source, source.bandwidth / 10.0);
}

}  // namespace lossyhom
