#pragma once

// Nonlinear SISO agents x' = g(x, u), y = h(x) together with their regulator
// maps (steady state and steady input for a constant output r) and incremental
// storage functions V(x, x*).

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>

#include "palloc/error.hpp"

namespace palloc {

namespace plants {

/// x' = u, y = x.
struct SingleIntegrator {
  int state_dim() const { return 1; }
  Eigen::VectorXd dynamics(const Eigen::VectorXd&, double u) const {
    return Eigen::VectorXd::Constant(1, u);
  }
  double output(const Eigen::VectorXd& x) const { return x(0); }
  Eigen::VectorXd reg_state(double r) const { return Eigen::VectorXd::Constant(1, r); }
  double reg_input(double) const { return 0.0; }
  double lipschitz_M() const { return 0.0; }
  double storage(const Eigen::VectorXd& x, const Eigen::VectorXd& xs) const {
    const double e = x(0) - xs(0);
    return 0.5 * e * e;
  }
  friend bool operator==(const SingleIntegrator&, const SingleIntegrator&) = default;
};

/// Perishable inventory: I' = -theta I + P - demand, y = I.
struct Inventory {
  double theta = 1.0;
  double demand = 1.0;

  int state_dim() const { return 1; }
  Eigen::VectorXd dynamics(const Eigen::VectorXd& x, double u) const {
    return Eigen::VectorXd::Constant(1, -theta * x(0) + u - demand);
  }
  double output(const Eigen::VectorXd& x) const { return x(0); }
  Eigen::VectorXd reg_state(double r) const { return Eigen::VectorXd::Constant(1, r); }
  double reg_input(double r) const { return theta * r + demand; }
  double lipschitz_M() const { return theta; }
  double storage(const Eigen::VectorXd& x, const Eigen::VectorXd& xs) const {
    const double e = x(0) - xs(0);
    return 0.5 * e * e;
  }
  friend bool operator==(const Inventory&, const Inventory&) = default;
};

/// Chua circuit with the inner loop F = u + f(x1) closed, so the diode
/// nonlinearity cancels and u is the exposed input.
struct ChuaPassivated {
  double alpha = 9.0;
  double beta = 100.0 / 7.0;
  double a = -8.0 / 7.0;
  double b = -5.0 / 7.0;
  double c = 1.0;

  double diode(double x1) const {
    return b * x1 + 0.5 * (a - b) * (std::abs(x1 + c) - std::abs(x1 - c));
  }

  int state_dim() const { return 3; }
  Eigen::VectorXd dynamics(const Eigen::VectorXd& x, double u) const {
    const double F = u + diode(x(0));
    Eigen::VectorXd dx(3);
    dx(0) = alpha * (x(1) - x(0) - diode(x(0)) + F);
    dx(1) = x(0) - x(1) + x(2);
    dx(2) = -beta * x(1);
    return dx;
  }
  double output(const Eigen::VectorXd& x) const { return x(0); }
  Eigen::VectorXd reg_state(double r) const {
    Eigen::VectorXd xs(3);
    xs << r, 0.0, -r;
    return xs;
  }
  double reg_input(double r) const { return r; }
  double lipschitz_M() const { return 1.0; }
  // Half of (1/alpha) e1^2 + e2^2 + (1/beta) e3^2; the halving makes the
  // supply rate exactly (y - y*)(u - u*).
  double storage(const Eigen::VectorXd& x, const Eigen::VectorXd& xs) const {
    const Eigen::VectorXd e = x - xs;
    return 0.5 * (e(0) * e(0) / alpha + e(1) * e(1) + e(2) * e(2) / beta);
  }
  friend bool operator==(const ChuaPassivated&, const ChuaPassivated&) = default;
};

/// z1' = e1 z2^3, z2' = -e2 z1 + e3 x, x' = -e4 z2^3 - e5 x + u, y = x.
/// State ordering is (z1, z2, x).
struct NonMinPhase {
  double e1 = 1.0;
  double e2 = 1.0;
  double e3 = 1.0;
  double e4 = 1.0;
  double e5 = 1.0;

  int state_dim() const { return 3; }
  Eigen::VectorXd dynamics(const Eigen::VectorXd& s, double u) const {
    const double z2c = s(1) * s(1) * s(1);
    Eigen::VectorXd ds(3);
    ds(0) = e1 * z2c;
    ds(1) = -e2 * s(0) + e3 * s(2);
    ds(2) = -e4 * z2c - e5 * s(2) + u;
    return ds;
  }
  double output(const Eigen::VectorXd& s) const { return s(2); }
  Eigen::VectorXd reg_state(double r) const {
    Eigen::VectorXd xs(3);
    xs << e3 * r / e2, 0.0, r;
    return xs;
  }
  double reg_input(double r) const { return e5 * r; }
  double lipschitz_M() const { return e5; }
  // Weights chosen so the z2^3 cross terms cancel for any positive e1..e5;
  // with all e = 1 this is 1/2 dz1^2 + 1/4 dz2^4 + 1/2 dx^2.
  double storage(const Eigen::VectorXd& s, const Eigen::VectorXd& xs) const {
    const double d1 = s(0) - xs(0);
    const double d2 = s(1) - xs(1);
    const double d3 = s(2) - xs(2);
    const double w1 = e2 * e4 / (e1 * e3);
    const double w2 = e4 / e3;
    return 0.5 * w1 * d1 * d1 + 0.25 * w2 * d2 * d2 * d2 * d2 + 0.5 * d3 * d3;
  }
  friend bool operator==(const NonMinPhase&, const NonMinPhase&) = default;
};

/// Caller-supplied model. Storage is optional; audits on a model without one fail.
struct UserPlant {
  std::string name;
  int dim = 1;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)> g;
  std::function<double(const Eigen::VectorXd&)> h;
  std::function<Eigen::VectorXd(double)> x_of_r;
  std::function<double(double)> u_of_r;
  double M = 0.0;
  std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> V;

  int state_dim() const { return dim; }
  Eigen::VectorXd dynamics(const Eigen::VectorXd& x, double u) const { return g(x, u); }
  double output(const Eigen::VectorXd& x) const { return h(x); }
  Eigen::VectorXd reg_state(double r) const { return x_of_r(r); }
  double reg_input(double r) const { return u_of_r(r); }
  double lipschitz_M() const { return M; }

  friend bool operator==(const UserPlant& a, const UserPlant& b) { return a.name == b.name; }
};

}  // namespace plants

/// Value type over the plant library.
class Plant {
 public:
  using Model = std::variant<plants::SingleIntegrator, plants::Inventory, plants::ChuaPassivated,
                             plants::NonMinPhase, plants::UserPlant>;

  Plant() = default;
  template <class P>
    requires std::is_constructible_v<Model, P>
  Plant(P p) : model_(std::move(p)) {}  // NOLINT(google-explicit-constructor)

  int state_dim() const {
    return std::visit([](const auto& p) { return p.state_dim(); }, model_);
  }
  Eigen::VectorXd dynamics(const Eigen::VectorXd& x, double u) const {
    return std::visit([&](const auto& p) { return p.dynamics(x, u); }, model_);
  }
  double output(const Eigen::VectorXd& x) const {
    return std::visit([&](const auto& p) { return p.output(x); }, model_);
  }
  Eigen::VectorXd reg_state(double r) const {
    return std::visit([&](const auto& p) { return p.reg_state(r); }, model_);
  }
  double reg_input(double r) const {
    return std::visit([&](const auto& p) { return p.reg_input(r); }, model_);
  }
  double lipschitz_M() const {
    return std::visit([](const auto& p) { return p.lipschitz_M(); }, model_);
  }

  bool has_storage() const {
    if (const auto* user = std::get_if<plants::UserPlant>(&model_)) return static_cast<bool>(user->V);
    return true;
  }

  double storage(const Eigen::VectorXd& x, const Eigen::VectorXd& x_star) const {
    if (const auto* user = std::get_if<plants::UserPlant>(&model_)) {
      if (!user->V) throw Error(ErrorKind::unsupported_audit, "plant '" + user->name + "' has no storage function");
      return user->V(x, x_star);
    }
    return std::visit(
        [&](const auto& p) -> double {
          if constexpr (std::is_same_v<std::decay_t<decltype(p)>, plants::UserPlant>) {
            return 0.0;
          } else {
            return p.storage(x, x_star);
          }
        },
        model_);
  }

  std::string name() const {
    return std::visit(
        [](const auto& p) -> std::string {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, plants::SingleIntegrator>) return "integrator";
          else if constexpr (std::is_same_v<T, plants::Inventory>) return "inventory";
          else if constexpr (std::is_same_v<T, plants::ChuaPassivated>) return "chua";
          else if constexpr (std::is_same_v<T, plants::NonMinPhase>) return "nonminphase";
          else return p.name;
        },
        model_);
  }

  const Model& model() const noexcept { return model_; }
  friend bool operator==(const Plant&, const Plant&) = default;

 private:
  Model model_{plants::SingleIntegrator{}};
};

struct RegulatorResidual {
  double dynamics;  ///< ||g(x(r), u(r))||
  double output;    ///< |h(x(r)) - r|
};

inline RegulatorResidual regulator_residual(const Plant& p, double r) {
  const Eigen::VectorXd xs = p.reg_state(r);
  return {p.dynamics(xs, p.reg_input(r)).norm(), std::abs(p.output(xs) - r)};
}

/// Forward-difference rate of V along the vector field at (x, u), relative to
/// the equilibrium for output r_star.
inline double storage_rate(const Plant& p, const Eigen::VectorXd& x, double u, double r_star, double h) {
  if (!p.has_storage()) {
    throw Error(ErrorKind::unsupported_audit, "plant '" + p.name() + "' has no storage function");
  }
  if (!(h > 0.0)) throw Error(ErrorKind::invalid_dimension, "storage_rate needs h > 0");
  const Eigen::VectorXd xs = p.reg_state(r_star);
  const Eigen::VectorXd xn = x + h * p.dynamics(x, u);
  return (p.storage(xn, xs) - p.storage(x, xs)) / h;
}

/// Supply rate (y - y*)(u - u*) for the audit inequality V' <= supply.
inline double supply_rate(const Plant& p, const Eigen::VectorXd& x, double u, double r_star) {
  return (p.output(x) - r_star) * (u - p.reg_input(r_star));
}

}  // namespace palloc
