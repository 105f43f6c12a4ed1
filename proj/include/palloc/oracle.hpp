#pragma once

// Centralized ground truth: the allocation optimum by nested bisection on the
// KKT conditions, log-linear rate fits, and finite-difference gradient checks.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "palloc/costs.hpp"
#include "palloc/error.hpp"

namespace palloc {

struct AllocationSolution {
  std::vector<double> y_star;
  double lambda0 = 0.0;
  double objective = 0.0;
  double kkt_residual = 0.0;      ///< max_i |grad f_i(y_i*) + lambda0|
  double balance_residual = 0.0;  ///< |sum y* - sum d0|
  int iterations = 0;
};

namespace detail {

inline constexpr double kSearchBound = 1e6;

/// Solves grad f(y) = target on [-1e6, 1e6]; clamps to the interval ends
/// when the root lies outside.
inline double solve_gradient_equation(const CostFunction& f, double target, double guess = 0.0) {
  double lo = -kSearchBound;
  double hi = kSearchBound;
  if (f.gradient(lo) - target >= 0.0) return lo;
  if (f.gradient(hi) - target <= 0.0) return hi;
  double y = std::clamp(guess, lo, hi);
  for (int it = 0; it < 200; ++it) {
    const double r = f.gradient(y) - target;
    if (r == 0.0) return y;
    if (r < 0.0) lo = y; else hi = y;
    if (std::abs(r) <= 1e-14 * (1.0 + std::abs(target)) || hi - lo <= 4e-16 * (1.0 + std::abs(y))) return y;
    const double h = f.hessian(y);
    double next = h > 0.0 ? y - r / h : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    y = next;
  }
  return y;
}

}  // namespace detail

/// Minimizes sum f_i(y_i) subject to sum y_i = sum d0_i. Each y_i(lambda0)
/// solves grad f_i(y_i) = -lambda0; sum y_i(lambda0) is decreasing in lambda0,
/// so an outer bisection on lambda0 finds the unique balancing multiplier.
inline AllocationSolution solve_allocation(std::span<const CostFunction> costs, std::span<const double> d0) {
  if (costs.size() != d0.size() || costs.empty()) {
    throw Error(ErrorKind::invalid_dimension, "need one observation per cost");
  }
  double target = 0.0;
  for (double d : d0) target += d;

  const auto excess = [&](double lambda0, std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < costs.size(); ++i) {
      y[i] = detail::solve_gradient_equation(costs[i], -lambda0, y[i]);
      s += y[i];
    }
    return s - target;
  };

  std::vector<double> y(costs.size(), 0.0);
  double lo = -detail::kSearchBound;
  double hi = detail::kSearchBound;
  const double f_lo = excess(lo, y);
  const double f_hi = excess(hi, y);
  if (!(f_lo >= 0.0 && f_hi <= 0.0)) {
    throw Error(ErrorKind::unbounded, "multiplier bracket [-1e6, 1e6] does not straddle the balance");
  }

  AllocationSolution sol;
  double mid = 0.0;
  double f_mid = 0.0;
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    f_mid = excess(mid, y);
    sol.iterations = it + 1;
    if (std::abs(f_mid) < 1e-10) break;
    if (f_mid > 0.0) lo = mid; else hi = mid;
    if (hi - lo <= 0.0) break;
  }

  sol.lambda0 = mid;
  sol.y_star = y;
  sol.balance_residual = std::abs(f_mid);
  for (std::size_t i = 0; i < costs.size(); ++i) {
    sol.objective += costs[i].value(y[i]);
    sol.kkt_residual = std::max(sol.kkt_residual, std::abs(costs[i].gradient(y[i]) + sol.lambda0));
  }
  return sol;
}

struct RateFit {
  double rate;       ///< -slope of ln(error) against time
  double r_squared;
  std::size_t first; ///< index range [first, last) used by the fit
  std::size_t last;
};

/// Least-squares fit of ln(error) against time over the stretch that starts
/// when the error first drops to half its initial value and ends when it
/// first falls below `floor`.
inline RateFit exp_rate_fit(std::span<const double> times, std::span<const double> errors, double floor = 1e-8) {
  if (times.size() != errors.size()) throw Error(ErrorKind::invalid_dimension, "times and errors differ in length");
  if (errors.empty()) throw Error(ErrorKind::insufficient_data, "no samples");
  const double ceiling = 0.5 * errors.front();
  std::size_t first = 0;
  while (first < errors.size() && errors[first] > ceiling) ++first;
  std::size_t last = first;
  while (last < errors.size() && errors[last] >= floor) ++last;
  if (last - first < 10) {
    throw Error(ErrorKind::insufficient_data,
                "fit window holds " + std::to_string(last - first) + " samples, need at least 10");
  }
  const double n = static_cast<double>(last - first);
  double st = 0.0, sl = 0.0;
  for (std::size_t k = first; k < last; ++k) {
    if (!(errors[k] > 0.0)) throw Error(ErrorKind::evaluation, "errors must be positive inside the fit window");
    st += times[k];
    sl += std::log(errors[k]);
  }
  const double mt = st / n;
  const double ml = sl / n;
  double stt = 0.0, stl = 0.0, sll = 0.0;
  for (std::size_t k = first; k < last; ++k) {
    const double dt = times[k] - mt;
    const double dl = std::log(errors[k]) - ml;
    stt += dt * dt;
    stl += dt * dl;
    sll += dl * dl;
  }
  if (stt == 0.0) throw Error(ErrorKind::insufficient_data, "fit window spans zero time");
  const double slope = stl / stt;
  const double r2 = sll == 0.0 ? 1.0 : (stl * stl) / (stt * sll);
  return {-slope, r2, first, last};
}

/// max over points of |analytic - centered FD| / (1 + |analytic|), h = 1e-6.
inline double fd_gradient_check(const CostFunction& f, std::span<const double> points) {
  constexpr double h = 1e-6;
  double worst = 0.0;
  for (double y : points) {
    const double analytic = f.gradient(y);
    const double fd = (f.value(y + h) - f.value(y - h)) / (2.0 * h);
    worst = std::max(worst, std::abs(analytic - fd) / (1.0 + std::abs(analytic)));
  }
  return worst;
}

}  // namespace palloc
