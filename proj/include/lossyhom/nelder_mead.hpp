#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace lossyhom {

struct NelderMeadOptions {
  double initial_step = 0.05;   // simplex edge, in box units
  double diameter_tol = 1e-6;   // stop when every vertex is this close to the best
  int max_evaluations = 2000;   // shared by all restarts
  int max_restarts = 3;         // fresh simplex at the best point after convergence
};

struct NelderMeadResult {
  std::vector<double> point;
  double value = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  bool converged = false;
};

namespace detail {

template <typename Objective>
NelderMeadResult nelder_mead_pass(Objective& f, std::vector<double> start, const NelderMeadOptions& opts, int budget) {
  const std::size_t n = start.size();
  for (auto& v : start) v = std::clamp(v, 0.0, 1.0);

  NelderMeadResult result;
  auto eval = [&](const std::vector<double>& x) {
    ++result.evaluations;
    for (double v : x)
      if (v < 0.0 || v > 1.0) return std::numeric_limits<double>::infinity();
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  std::vector<std::vector<double>> simplex(n + 1, start);
  for (std::size_t i = 0; i < n; ++i) {
    auto& x = simplex[i + 1];
    x[i] += x[i] + opts.initial_step <= 1.0 ? opts.initial_step : -opts.initial_step;
  }
  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i <= n; ++i) values[i] = eval(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    std::vector<std::vector<double>> s(n + 1);
    std::vector<double> v(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      s[i] = simplex[order[i]];
      v[i] = values[order[i]];
    }
    simplex = std::move(s);
    values = std::move(v);
  };
  auto diameter = [&] {
    double d = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t k = 0; k < n; ++k) d = std::max(d, std::abs(simplex[i][k] - simplex[0][k]));
    return d;
  };
  auto along = [&](const std::vector<double>& centroid, const std::vector<double>& worst, double t) {
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = centroid[k] + t * (worst[k] - centroid[k]);
    return x;
  };

  sort_simplex();
  while (true) {
    if (diameter() < opts.diameter_tol) {
      result.converged = true;
      break;
    }
    if (result.evaluations >= budget) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / double(n);
    const auto& worst = simplex[n];

    const auto reflected = along(centroid, worst, -1.0);
    const double fr = eval(reflected);
    if (fr < values[0]) {
      const auto expanded = along(centroid, worst, -2.0);
      const double fe = eval(expanded);
      if (fe < fr) {
        simplex[n] = expanded;
        values[n] = fe;
      } else {
        simplex[n] = reflected;
        values[n] = fr;
      }
    } else if (fr < values[n - 1]) {
      simplex[n] = reflected;
      values[n] = fr;
    } else {
      const bool outside = fr < values[n];
      const auto contracted = along(centroid, worst, outside ? -0.5 : 0.5);
      const double fc = eval(contracted);
      if (fc < std::min(fr, values[n])) {
        simplex[n] = contracted;
        values[n] = fc;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t k = 0; k < n; ++k) simplex[i][k] = simplex[0][k] + 0.5 * (simplex[i][k] - simplex[0][k]);
          values[i] = eval(simplex[i]);
        }
      }
    }
    sort_simplex();
  }
  result.point = simplex[0];
  result.value = values[0];
  return result;
}

}  // namespace detail

// Nelder-Mead on the unit box [0, 1]^n. Trial points outside the box score
// +inf, so the simplex contracts back in instead of flattening onto a face.
// A converged pass is restarted from its best point while that keeps improving.
// Deterministic: fixed initial simplex, stable vertex ordering.
template <typename Objective>
NelderMeadResult nelder_mead_box(Objective&& f, std::vector<double> start, const NelderMeadOptions& opts = {}) {
  auto best = detail::nelder_mead_pass(f, std::move(start), opts, opts.max_evaluations);
  for (int r = 0; r < opts.max_restarts && best.converged; ++r) {
    const int remaining = opts.max_evaluations - best.evaluations;
    if (remaining <= 0) break;
    auto next = detail::nelder_mead_pass(f, best.point, opts, remaining);
    const int used = best.evaluations + next.evaluations;
    if (!(next.value < best.value)) {
      best.evaluations = used;
      break;
    }
    best = std::move(next);
    best.evaluations = used;
  }
  return best;
}

}  // namespace lossyhom
