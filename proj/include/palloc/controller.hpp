#pragma once

// Distributed gradient / dual-consensus control law with observer-based
// rejection of sinusoidal observation disturbances:
//
//   u_i      = -gamma grad f_i(y_i) + lambda_i + u_i(y_i)
//   lambda_i'= -lambda^v_i - z^v_i + d_i - y_i - D_eps_i eta_i
//   eta_i'   = (S_i - L_i D_i) eta_i + L_i d_i
//   z_i'     = lambda^v_i
//
// with lambda^v_i = sum_j a_ij (lambda_i - lambda_j) and likewise for z.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "palloc/costs.hpp"
#include "palloc/error.hpp"
#include "palloc/observer.hpp"
#include "palloc/plants.hpp"

namespace palloc {

enum class ControlMode {
  full,                ///< observer active, user costs
  no_disturbance,      ///< no observer; d_i enters the dual update directly
  average_consensus,   ///< full, with grad f_i(y) = y
};

inline const char* to_string(ControlMode m) {
  switch (m) {
    case ControlMode::full: return "full";
    case ControlMode::no_disturbance: return "no_disturbance";
    case ControlMode::average_consensus: return "average_consensus";
  }
  return "full";
}

struct ControllerState {
  double lambda = 0.0;
  double z = 0.0;
  Eigen::VectorXd eta;
};

struct ControllerParams {
  double gamma = 1.0;
  ControlMode mode = ControlMode::full;
  /// Accept gamma below the gain bound (valid for exponentially passive plants).
  bool override_gamma = false;
  /// Include the steady-state feedforward u_i(y_i). Disabling it gives the
  /// baseline that ignores plant dynamics.
  bool feedforward = true;
};

struct ControllerDerivatives {
  double lambda_dot;
  Eigen::VectorXd eta_dot;
  double z_dot;
};

/// Gradient term as seen by the controller for the given mode.
inline double controller_gradient(const CostFunction& cost, double y, ControlMode mode) {
  return mode == ControlMode::average_consensus ? y : cost.gradient(y);
}

inline double control_input(int agent, double y, const ControllerState& cs, const CostFunction& cost,
                            const Plant& plant, const ControllerParams& params, double t = 0.0) {
  const double grad = controller_gradient(cost, y, params.mode);
  const double ff = params.feedforward ? plant.reg_input(y) : 0.0;
  const double u = -params.gamma * grad + cs.lambda + ff;
  if (!std::isfinite(u)) {
    throw Error(ErrorKind::numeric, "non-finite control input for agent " + std::to_string(agent + 1) +
                                        " at t = " + std::to_string(t));
  }
  return u;
}

/// `neighbor_lambdas`, `neighbor_zs` and `weights` are aligned: entry k is
/// neighbor k's value and the edge weight a_ij. `gain` is ignored (and `eta`
/// may be empty) when the exosystem has dimension 0, i.e. no observer.
inline ControllerDerivatives controller_derivatives(int agent, double y, double d_obs, const ControllerState& cs,
                                                    std::span<const double> neighbor_lambdas,
                                                    std::span<const double> neighbor_zs,
                                                    std::span<const double> weights, const Exosystem* exo,
                                                    const ObserverGain* gain, bool d_eps_active) {
  if (neighbor_lambdas.size() != weights.size() || neighbor_zs.size() != weights.size()) {
    throw Error(ErrorKind::invalid_dimension, "neighbor data misaligned for agent " + std::to_string(agent + 1));
  }
  double lambda_v = 0.0;
  double z_v = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    lambda_v += weights[k] * (cs.lambda - neighbor_lambdas[k]);
    z_v += weights[k] * (cs.z - neighbor_zs[k]);
  }
  ControllerDerivatives out;
  out.lambda_dot = -lambda_v - z_v + d_obs - y;
  out.z_dot = lambda_v;
  if (exo != nullptr) {
    if (cs.eta.size() != exo->dim() || gain == nullptr || gain->L.size() != exo->dim()) {
      throw Error(ErrorKind::invalid_dimension, "observer state of agent " + std::to_string(agent + 1) +
                                                    " does not match its exosystem");
    }
    if (d_eps_active) out.lambda_dot -= exo->D_eps().dot(cs.eta);
    out.eta_dot = gain->closed_loop * cs.eta + gain->L * d_obs;
  }
  return out;
}

/// max_i (1 + M_i) / h_i over the agents, h_i the lower curvature of f_i on `window`.
inline double gamma_lower_bound(std::span<const CostFunction> costs, std::span<const Plant> plants,
                                const CurvatureWindow& window = {}) {
  if (costs.size() != plants.size() || costs.empty()) {
    throw Error(ErrorKind::invalid_dimension, "need one cost per plant");
  }
  double bound = 0.0;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    const double h = curvature_bounds(costs[i], window.lo, window.hi, window.samples).lower;
    if (!(h > 0.0)) {
      throw Error(ErrorKind::non_strongly_convex, "agent " + std::to_string(i + 1) + " cost has curvature " +
                                                      std::to_string(h) + " on the operating interval");
    }
    bound = std::max(bound, (1.0 + plants[i].lipschitz_M()) / h);
  }
  return bound;
}

struct EquilibriumReport {
  double lambda0;
  double kkt_residual;        ///< max_i |grad f_i(y_i) + lambda0|
  double balance_residual;    ///< |sum y - sum d0|
  double consensus_residual;  ///< max_i |lambda_i - mean(lambda)|
};

/// At an equilibrium every lambda_i equals gamma * grad f_i(y_i), so the
/// common KKT multiplier is -mean(lambda) / gamma.
inline EquilibriumReport equilibrium_residual(std::span<const double> y, std::span<const double> lambdas,
                                              std::span<const double> d0, std::span<const CostFunction> costs,
                                              double gamma) {
  const std::size_t n = y.size();
  if (lambdas.size() != n || d0.size() != n || costs.size() != n || n == 0) {
    throw Error(ErrorKind::invalid_dimension, "equilibrium_residual inputs differ in length");
  }
  if (!(gamma > 0.0)) throw Error(ErrorKind::invalid_dimension, "gamma must be positive");
  double mean = 0.0;
  for (double l : lambdas) mean += l;
  mean /= static_cast<double>(n);

  EquilibriumReport r{-mean / gamma, 0.0, 0.0, 0.0};
  double sum_y = 0.0;
  double sum_d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r.kkt_residual = std::max(r.kkt_residual, std::abs(costs[i].gradient(y[i]) + r.lambda0));
    r.consensus_residual = std::max(r.consensus_residual, std::abs(lambdas[i] - mean));
    sum_y += y[i];
    sum_d += d0[i];
  }
  r.balance_residual = std::abs(sum_y - sum_d);
  return r;
}

}  // namespace palloc
