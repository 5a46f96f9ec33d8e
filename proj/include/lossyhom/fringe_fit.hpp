#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "lossyhom/errors.hpp"

namespace lossyhom {

struct FringeSample {
  double param = 0.0;  // swept parameter value
  double tau_r = 0.0;  // s
  double p = 0.0;      // normalized coincidence probability
};

struct FringeFit {
  double sigma_sq = 0.0;      // s^2
  double center = 0.0;        // parameter units
  double center_tau = 0.0;    // s
  double visibility = 0.0;    // fitted V
  double rms_residual = 0.0;  // in p
};

namespace detail {

inline std::array<double, 3> solve3(std::array<std::array<double, 4>, 3> m) {
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    std::swap(m[col], m[pivot]);
    if (m[col][col] == 0.0) throw NumericError("fringe fit: singular normal equations");
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (int k = col; k < 4; ++k) m[r][k] -= f * m[col][k];
    }
  }
  return {m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
}

}  // namespace detail

// Fits p(tau) = 1 - V exp(-(tau - tau0)^2 / sigma^2) by weighted linear least
// squares on ln(1 - p) = ln V - (tau - tau0)^2 / sigma^2, weights (1 - p)^2.
// V enters only through the constant term, so sigma^2 and tau0 do not depend
// on how V is estimated; the minimum row supplies the starting scale.
inline FringeFit fit_fringe_width(std::span<const FringeSample> samples) {
  if (samples.size() < 7) throw NumericError("fringe fit: need at least 7 rows");

  std::vector<FringeSample> rows(samples.begin(), samples.end());
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.tau_r < b.tau_r; });
  const auto min_it = std::min_element(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.p < b.p; });
  if (min_it == rows.begin() || min_it == rows.end() - 1)
    throw NumericError("fringe fit: no interior minimum in the scanned range");

  const double tau_lo = rows.front().tau_r, tau_hi = rows.back().tau_r;
  const double tau_mid = 0.5 * (tau_lo + tau_hi);
  const double tau_scale = 0.5 * (tau_hi - tau_lo);
  if (!(tau_scale > 0.0)) throw NumericError("fringe fit: tau_r does not vary across rows");
  const double v_min = 1.0 - min_it->p;
  if (!(v_min > 0.0)) throw NumericError("fringe fit: minimum row has p >= 1");

  std::array<std::array<double, 4>, 3> normal{};
  std::size_t used = 0;
  for (const auto& row : rows) {
    const double y = 1.0 - row.p;
    if (!(y > 0.0) || !std::isfinite(y)) continue;
    const double u = (row.tau_r - tau_mid) / tau_scale;
    const double basis[3] = {1.0, u, u * u};
    const double w = y * y;
    const double target = std::log(y / v_min);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) normal[i][j] += w * basis[i] * basis[j];
      normal[i][3] += w * basis[i] * target;
    }
    ++used;
  }
  if (used < 3) throw NumericError("fringe fit: fewer than 3 usable rows");

  const auto [a0, a1, a2] = detail::solve3(normal);
  if (!(a2 < 0.0)) throw NumericError("fringe fit: fitted curvature is not a dip");

  FringeFit fit;
  fit.sigma_sq = -tau_scale * tau_scale / a2;
  const double u0 = -a1 / (2.0 * a2);
  fit.center_tau = tau_mid + tau_scale * u0;
  fit.visibility = v_min * std::exp(a0 - a1 * a1 / (4.0 * a2));

  // Parameter value at tau0, interpolated along the scan.
  fit.center = rows.front().param;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const auto& lo = rows[i];
    const auto& hi = rows[i + 1];
    if (fit.center_tau >= lo.tau_r && fit.center_tau <= hi.tau_r && hi.tau_r > lo.tau_r) {
      const double t = (fit.center_tau - lo.tau_r) / (hi.tau_r - lo.tau_r);
      fit.center = lo.param + t * (hi.param - lo.param);
      break;
    }
  }

  double sq = 0.0;
  for (const auto& row : rows) {
    const double d = row.tau_r - fit.center_tau;
    const double model = 1.0 - fit.visibility * std::exp(-d * d / fit.sigma_sq);
    sq += (row.p - model) * (row.p - model);
  }
  fit.rms_residual = std::sqrt(sq / double(rows.size()));
  return fit;
}

}  // namespace lossyhom
