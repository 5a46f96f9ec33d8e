#pragma once

// Analytic coincidence probability in the long-detection-window limit:
//
//   P_c / kappa = 1 - exp(-m^2 / sigma^2) exp(-tau_r^2 / sigma^2)
//
// with loss mismatch m = x1 Im(alpha1) - x2 Im(alpha2), group-delay
// difference tau_r = x2 Re(alpha2) - x1 Re(alpha1) and sigma^2 set by the
// configured BetaConvention.

#include <cmath>
#include <sstream>

#include "lossyhom/optics.hpp"

namespace lossyhom {

inline double tau_r(const InterferometerConfig& config) {
  return config.arm2.length * config.dispersion2().alpha.real() -
         config.arm1.length * config.dispersion1().alpha.real();
}

// x1 Im(alpha1) - x2 Im(alpha2)
inline double loss_mismatch(const InterferometerConfig& config) {
  return config.arm1.length * config.dispersion1().alpha.imag() -
         config.arm2.length * config.dispersion2().alpha.imag();
}

inline double effective_variance(const InterferometerConfig& config) {
  const double inv_b2 = config.source.inverse_bandwidth_sq();
  const double q1 = config.arm1.length * config.dispersion1().beta.imag();
  const double q2 = config.arm2.length * config.dispersion2().beta.imag();
  double variance = 0.0;
  if (config.beta_convention == BetaConvention::single_formula) {
    if (!config.arm2.is_vacuum())
      throw ConfigError("beta_convention: \"single\" requires a vacuum arm2");
    variance = inv_b2 + 2.0 * q1;
  } else {
    variance = inv_b2 + q1 + q2;
  }
  if (!(variance > 0.0)) {
    std::ostringstream msg;
    msg << "non-positive effective variance " << variance << " s^2: Im(beta) too negative (arm1.beta Im = "
        << config.dispersion1().beta.imag() << ", arm2.beta Im = " << config.dispersion2().beta.imag() << ")";
    throw NumericError(msg.str());
  }
  return variance;
}

// Center-frequency attenuation of both photons. Band integration corrects it
// by a factor 1 + O((B x Im alpha)^2); the oracle reports the exact value.
inline double throughput_estimate(const InterferometerConfig& config) {
  const double att = config.dispersion1().k0.imag() * config.arm1.length +
                     config.dispersion2().k0.imag() * config.arm2.length;
  return std::exp(-2.0 * att);
}

inline CoincidenceResult coincidence_closed_form(const InterferometerConfig& config) {
  config.validate();
  const double variance = effective_variance(config);
  const double tau = tau_r(config);
  const double mismatch = loss_mismatch(config);

  CoincidenceResult r;
  r.tau_r = tau;
  r.effective_variance = variance;
  r.visibility = std::exp(-mismatch * mismatch / variance);
  // expm1 keeps p accurate near the dark fringe; "0.0 -" avoids a -0.
  r.p_normalized = 0.0 - std::expm1(-(mismatch * mismatch + tau * tau) / variance);
  r.throughput = throughput_estimate(config);
  return r;
}

}  // namespace lossyhom
