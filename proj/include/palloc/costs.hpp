#pragma once

// Local convex costs f_i with analytic first and second derivatives.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>

#include "palloc/error.hpp"

namespace palloc {

namespace costs {

/// a*y^2 + b*y + c with a > 0.
struct Quadratic {
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;

  double value(double y) const { return a * y * y + b * y + c; }
  double gradient(double y) const { return 2.0 * a * y + b; }
  double hessian(double) const { return 2.0 * a; }
  friend bool operator==(const Quadratic&, const Quadratic&) = default;
};

/// (y + 3)^2
struct Nmp1 {
  double value(double y) const { return (y + 3.0) * (y + 3.0); }
  double gradient(double y) const { return 2.0 * (y + 3.0); }
  double hessian(double) const { return 2.0; }
  friend bool operator==(const Nmp1&, const Nmp1&) = default;
};

/// y^2 ln(1 + y^2) + (y + 1)^2
struct Nmp2 {
  double value(double y) const {
    const double s = y * y;
    return s * std::log1p(s) + (y + 1.0) * (y + 1.0);
  }
  double gradient(double y) const {
    const double s = y * y;
    return 2.0 * y * std::log1p(s) + 2.0 * y * s / (1.0 + s) + 2.0 * (y + 1.0);
  }
  double hessian(double y) const {
    const double s = y * y;
    const double q = 1.0 + s;
    return 2.0 * std::log1p(s) + 4.0 * s / q + (6.0 * s + 2.0 * s * s) / (q * q) + 2.0;
  }
  friend bool operator==(const Nmp2&, const Nmp2&) = default;
};

/// ln(e^{-0.1 y} + e^{0.3 y}) + y^2, evaluated in log-sum-exp form.
struct Nmp3 {
  double value(double y) const {
    const double p = -0.1 * y;
    const double q = 0.3 * y;
    const double m = std::max(p, q);
    return m + std::log(std::exp(p - m) + std::exp(q - m)) + y * y;
  }
  double gradient(double y) const { return -0.1 + 0.4 * weight(y) + 2.0 * y; }
  double hessian(double y) const {
    const double w = weight(y);
    return 0.16 * w * (1.0 - w) + 2.0;
  }
  friend bool operator==(const Nmp3&, const Nmp3&) = default;

 private:
  // Softmax weight of the e^{0.3 y} term.
  static double weight(double y) {
    const double t = 0.4 * y;
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
  }
};

/// y^2 / (25 sqrt(y^2 + 1)) + (y - 3)^2
struct Nmp4 {
  double value(double y) const {
    const double s = y * y + 1.0;
    return y * y / (25.0 * std::sqrt(s)) + (y - 3.0) * (y - 3.0);
  }
  double gradient(double y) const {
    const double s = y * y + 1.0;
    return y * (y * y + 2.0) / (25.0 * s * std::sqrt(s)) + 2.0 * (y - 3.0);
  }
  double hessian(double y) const {
    const double s = y * y + 1.0;
    return (2.0 - y * y) / (25.0 * s * s * std::sqrt(s)) + 2.0;
  }
  friend bool operator==(const Nmp4&, const Nmp4&) = default;
};

}  // namespace costs

template <class F>
concept ScalarCost = requires(const F& f, double y) {
  { f.value(y) } -> std::convertible_to<double>;
  { f.gradient(y) } -> std::convertible_to<double>;
  { f.hessian(y) } -> std::convertible_to<double>;
};

/// Value type over the cost library.
class CostFunction {
 public:
  using Model = std::variant<costs::Quadratic, costs::Nmp1, costs::Nmp2, costs::Nmp3, costs::Nmp4>;

  CostFunction() = default;
  template <ScalarCost F>
    requires std::is_constructible_v<Model, F>
  CostFunction(F f) : model_(std::move(f)) {}  // NOLINT(google-explicit-constructor)

  static CostFunction quadratic(double a, double b, double c) {
    if (!(a > 0.0) || !std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) {
      throw Error(ErrorKind::non_strongly_convex, "quadratic cost needs finite a > 0");
    }
    return CostFunction(costs::Quadratic{a, b, c});
  }

  double value(double y) const {
    return std::visit([y](const auto& f) { return f.value(y); }, model_);
  }
  double gradient(double y) const {
    return std::visit([y](const auto& f) { return f.gradient(y); }, model_);
  }
  double hessian(double y) const {
    return std::visit([y](const auto& f) { return f.hessian(y); }, model_);
  }

  const Model& model() const noexcept { return model_; }

  std::string name() const {
    return std::visit(
        [](const auto& f) -> std::string {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, costs::Quadratic>) return "quadratic";
          else if constexpr (std::is_same_v<T, costs::Nmp1>) return "nmp1";
          else if constexpr (std::is_same_v<T, costs::Nmp2>) return "nmp2";
          else if constexpr (std::is_same_v<T, costs::Nmp3>) return "nmp3";
          else return "nmp4";
        },
        model_);
  }

  friend bool operator==(const CostFunction&, const CostFunction&) = default;

 private:
  Model model_{costs::Quadratic{}};
};

inline double gradient(const CostFunction& f, double y) { return f.gradient(y); }

struct CurvatureBounds {
  double lower;
  double upper;
};

/// Min and max of the Hessian over a uniform grid on [lo, hi].
inline CurvatureBounds curvature_bounds(const CostFunction& f, double lo, double hi, int samples) {
  if (!(lo < hi)) throw Error(ErrorKind::invalid_dimension, "curvature interval needs lo < hi");
  if (samples < 2) throw Error(ErrorKind::invalid_dimension, "curvature grid needs >= 2 samples");
  CurvatureBounds out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (int k = 0; k < samples; ++k) {
    const double y = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(samples - 1);
    const double h = f.hessian(y);
    if (!std::isfinite(h)) {
      throw Error(ErrorKind::evaluation, "non-finite Hessian at y = " + std::to_string(y));
    }
    out.lower = std::min(out.lower, h);
    out.upper = std::max(out.upper, h);
  }
  return out;
}

/// Operating interval and grid used for gain selection unless a config overrides it.
struct CurvatureWindow {
  double lo = -10.0;
  double hi = 10.0;
  int samples = 4001;
  friend bool operator==(const CurvatureWindow&, const CurvatureWindow&) = default;
};

}  // namespace palloc
