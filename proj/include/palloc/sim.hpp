#pragma once

// Fixed-step RK4 integration of the closed loop: every agent's plant state,
// dual variables (lambda, z) and observer state eta are stacked into one
// vector and advanced together.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "palloc/controller.hpp"
#include "palloc/costs.hpp"
#include "palloc/error.hpp"
#include "palloc/graph.hpp"
#include "palloc/observer.hpp"
#include "palloc/oracle.hpp"
#include "palloc/plants.hpp"

namespace palloc {

/// d(t) = d0 + sum_j A_j sin(w_j t + phi_j) once t >= onset, d0 before.
struct DisturbanceSchedule {
  double d0 = 0.0;
  std::vector<double> freqs;
  std::vector<double> amplitudes;
  std::vector<double> phases;
  double onset = 0.0;

  friend bool operator==(const DisturbanceSchedule&, const DisturbanceSchedule&) = default;
};

inline void validate(const DisturbanceSchedule& s) {
  if (s.amplitudes.size() != s.freqs.size() || s.phases.size() != s.freqs.size()) {
    throw Error(ErrorKind::invalid_dimension, "disturbance freqs/amplitudes/phases differ in length");
  }
  for (double a : s.amplitudes) {
    if (!(a >= 0.0)) throw Error(ErrorKind::invalid_dimension, "disturbance amplitudes must be >= 0");
  }
  if (!(s.onset >= 0.0)) throw Error(ErrorKind::invalid_dimension, "disturbance onset must be >= 0");
}

inline double sinusoidal_part(const DisturbanceSchedule& s, double t) {
  double v = 0.0;
  for (std::size_t j = 0; j < s.freqs.size(); ++j) v += s.amplitudes[j] * std::sin(s.freqs[j] * t + s.phases[j]);
  return v;
}

inline double disturbance_value(const DisturbanceSchedule& s, double t) {
  return t < s.onset ? s.d0 : s.d0 + sinusoidal_part(s, t);
}

/// Either explicit gain entries or requested closed-loop poles. With neither,
/// default_poles() is used.
struct ObserverSpec {
  std::vector<std::complex<double>> poles;
  std::vector<double> L;
  friend bool operator==(const ObserverSpec&, const ObserverSpec&) = default;
};

struct InitialCondition {
  std::vector<double> x;
  double lambda = 0.0;
  double z = 0.0;
  std::vector<double> eta;
  friend bool operator==(const InitialCondition&, const InitialCondition&) = default;
};

struct AgentConfig {
  Plant plant;
  CostFunction cost;
  DisturbanceSchedule disturbance;
  ObserverSpec observer;
  std::optional<InitialCondition> initial;
  friend bool operator==(const AgentConfig&, const AgentConfig&) = default;
};

struct ControllerSettings {
  std::optional<double> gamma;  ///< defaults to 1.1 x gamma_lower_bound
  ControlMode mode = ControlMode::full;
  bool override_gamma = false;
  bool feedforward = true;
  friend bool operator==(const ControllerSettings&, const ControllerSettings&) = default;
};

struct Event {
  double time = 0.0;
  bool enable_d_eps = true;
  friend bool operator==(const Event&, const Event&) = default;
};

struct SimConfig {
  std::string name = "custom";
  Graph graph;
  std::vector<AgentConfig> agents;
  ControllerSettings controller;
  double dt = 0.01;
  double horizon = 100.0;
  int record_every = 1;
  /// Sinusoid compensation D_eps eta is on from t = 0 unless an event says otherwise.
  bool d_eps_initial = true;
  std::vector<Event> events;
  std::uint64_t seed = 1;
  double init_lo = -5.0;
  double init_hi = 5.0;
  CurvatureWindow curvature;
  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct AgentSample {
  Eigen::VectorXd x;
  double y = 0.0;
  double u = 0.0;
  double lambda = 0.0;
  double z = 0.0;
  double d = 0.0;
  Eigen::VectorXd eta;
};

struct Sample {
  double t = 0.0;
  std::vector<AgentSample> agents;
  double err_opt = 0.0;        ///< ||y - y*||
  double err_consensus = 0.0;  ///< max_i |lambda_i - mean lambda|
  bool d_eps_active = true;
};

struct Trajectory {
  std::vector<Sample> samples;
  AllocationSolution oracle;
  double gamma = 0.0;
  std::vector<double> d0;
  std::vector<std::string> warnings;

  std::size_t size() const { return samples.size(); }
  std::vector<double> times() const {
    std::vector<double> t;
    t.reserve(samples.size());
    for (const auto& s : samples) t.push_back(s.t);
    return t;
  }
  std::vector<double> err_opt() const {
    std::vector<double> e;
    e.reserve(samples.size());
    for (const auto& s : samples) e.push_back(s.err_opt);
    return e;
  }
  std::vector<double> outputs(std::size_t k) const {
    std::vector<double> y;
    for (const auto& a : samples.at(k).agents) y.push_back(a.y);
    return y;
  }
  std::vector<double> lambdas(std::size_t k) const {
    std::vector<double> l;
    for (const auto& a : samples.at(k).agents) l.push_back(a.lambda);
    return l;
  }
};

/// Cost the controller actually descends, also the one the oracle solves for.
inline CostFunction effective_cost(const AgentConfig& a, ControlMode mode) {
  return mode == ControlMode::average_consensus ? CostFunction::quadratic(0.5, 0.0, 0.0) : a.cost;
}

inline std::vector<CostFunction> effective_costs(const SimConfig& cfg) {
  std::vector<CostFunction> out;
  for (const auto& a : cfg.agents) out.push_back(effective_cost(a, cfg.controller.mode));
  return out;
}

inline std::vector<double> nominal_observations(const SimConfig& cfg) {
  std::vector<double> d0;
  for (const auto& a : cfg.agents) d0.push_back(a.disturbance.d0);
  return d0;
}

struct ResolvedGamma {
  double gamma;
  double bound;
  std::optional<std::string> warning;
};

inline ResolvedGamma resolve_gamma(const SimConfig& cfg) {
  std::vector<Plant> plants;
  for (const auto& a : cfg.agents) plants.push_back(a.plant);
  const auto costs = effective_costs(cfg);
  const double bound = gamma_lower_bound(costs, plants, cfg.curvature);
  if (!cfg.controller.gamma) return {1.1 * bound, bound, std::nullopt};
  const double g = *cfg.controller.gamma;
  if (!(g > 0.0)) throw Error(ErrorKind::usage, "gamma must be positive");
  if (g >= bound) return {g, bound, std::nullopt};
  if (!cfg.controller.override_gamma) {
    throw Error(ErrorKind::usage, "gamma " + std::to_string(g) + " is below the gain bound max (1+M_i)/h_i = " +
                                      std::to_string(bound) + "; set override_gamma to accept it");
  }
  return {g, bound,
          "gamma " + std::to_string(g) + " below gain bound " + std::to_string(bound) +
              " accepted by override (any gamma > 0 suffices for exponentially passive plants)"};
}

/// Uniform phases in [0, 2 pi), one independent stream per agent.
inline std::vector<double> draw_phases(std::uint64_t seed, int agent, std::size_t count) {
  std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(agent + 1)));
  std::uniform_real_distribution<double> dist(0.0, 2.0 * std::numbers::pi);
  std::vector<double> out(count);
  for (auto& p : out) p = dist(rng);
  return out;
}

namespace detail {

struct AgentRuntime {
  Plant plant;
  CostFunction cost;
  DisturbanceSchedule schedule;
  std::optional<Exosystem> exo;
  std::optional<ObserverGain> gain;
  int x_off = 0;
  int nx = 0;
  int lambda_off = 0;
  int z_off = 0;
  int eta_off = 0;
  int neta = 0;
  long long onset_step = 0;
};

class ClosedLoop {
 public:
  ClosedLoop(const SimConfig& cfg, ControllerParams params) : graph_(cfg.graph), params_(params) {
    int off = 0;
    for (const auto& a : cfg.agents) {
      AgentRuntime r;
      r.plant = a.plant;
      r.cost = a.cost;
      r.schedule = a.disturbance;
      r.x_off = off;
      r.nx = a.plant.state_dim();
      r.lambda_off = off + r.nx;
      r.z_off = r.lambda_off + 1;
      r.eta_off = r.z_off + 1;
      if (params_.mode != ControlMode::no_disturbance) {
        r.exo = Exosystem::build(a.disturbance.freqs);
        if (!a.observer.L.empty()) {
          r.gain = make_gain(*r.exo, Eigen::Map<const Eigen::VectorXd>(a.observer.L.data(),
                                                                        static_cast<Eigen::Index>(a.observer.L.size())));
        } else if (!a.observer.poles.empty()) {
          r.gain = design_gain(*r.exo, a.observer.poles);
        } else {
          r.gain = design_gain(*r.exo, default_poles(r.exo->dim()));
        }
        r.neta = r.exo->dim();
      }
      r.onset_step = std::llround(a.disturbance.onset / cfg.dt);
      off = r.eta_off + r.neta;
      agents_.push_back(std::move(r));
    }
    dim_ = off;
  }

  int dim() const { return dim_; }
  const std::vector<AgentRuntime>& agents() const { return agents_; }
  const ControllerParams& params() const { return params_; }

  double observation(const AgentRuntime& a, double t, long long step) const {
    return step >= a.onset_step ? a.schedule.d0 + sinusoidal_part(a.schedule, t) : a.schedule.d0;
  }

  ControllerState controller_state(const AgentRuntime& a, const Eigen::VectorXd& s) const {
    ControllerState cs;
    cs.lambda = s(a.lambda_off);
    cs.z = s(a.z_off);
    cs.eta = s.segment(a.eta_off, a.neta);
    return cs;
  }

  double input(std::size_t i, const Eigen::VectorXd& s, double t) const {
    const auto& a = agents_[i];
    const double y = a.plant.output(s.segment(a.x_off, a.nx));
    return control_input(static_cast<int>(i), y, controller_state(a, s), a.cost, a.plant, params_, t);
  }

  /// `step` selects which disturbances have switched on; t is the stage time.
  Eigen::VectorXd derivative(double t, long long step, const Eigen::VectorXd& s, bool d_eps_active) const {
    Eigen::VectorXd ds(dim_);
    std::vector<double> nl, nz, w;
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      const auto& a = agents_[i];
      const Eigen::VectorXd x = s.segment(a.x_off, a.nx);
      const double y = a.plant.output(x);
      const ControllerState cs = controller_state(a, s);
      const double u = control_input(static_cast<int>(i), y, cs, a.cost, a.plant, params_, t);
      ds.segment(a.x_off, a.nx) = a.plant.dynamics(x, u);

      nl.clear();
      nz.clear();
      w.clear();
      for (int j : graph_.neighbors(static_cast<int>(i))) {
        const auto& b = agents_[static_cast<std::size_t>(j)];
        nl.push_back(s(b.lambda_off));
        nz.push_back(s(b.z_off));
        w.push_back(graph_.weight(static_cast<int>(i), j));
      }
      const auto cd = controller_derivatives(static_cast<int>(i), y, observation(a, t, step), cs, nl, nz, w,
                                             a.exo ? &*a.exo : nullptr, a.gain ? &*a.gain : nullptr, d_eps_active);
      ds(a.lambda_off) = cd.lambda_dot;
      ds(a.z_off) = cd.z_dot;
      if (a.neta > 0) ds.segment(a.eta_off, a.neta) = cd.eta_dot;
    }
    return ds;
  }

 private:
  Graph graph_;
  ControllerParams params_;
  std::vector<AgentRuntime> agents_;
  int dim_ = 0;
};

}  // namespace detail

/// One classical RK4 step of x' = f(t, x).
template <class State, class F>
State rk4_step(F&& f, double t, const State& x, double dt) {
  const State k1 = f(t, x);
  const State k2 = f(t + 0.5 * dt, State(x + (0.5 * dt) * k1));
  const State k3 = f(t + 0.5 * dt, State(x + (0.5 * dt) * k2));
  const State k4 = f(t + dt, State(x + dt * k3));
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline void validate(const SimConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw Error(ErrorKind::usage, "dt must be positive");
  if (!(cfg.horizon > 0.0)) throw Error(ErrorKind::usage, "horizon must be positive");
  if (cfg.record_every < 1) throw Error(ErrorKind::usage, "record_every must be >= 1");
  if (static_cast<int>(cfg.agents.size()) != cfg.graph.size()) {
    throw Error(ErrorKind::invalid_dimension, "agent count " + std::to_string(cfg.agents.size()) +
                                                  " differs from graph size " + std::to_string(cfg.graph.size()));
  }
  if (cfg.graph.size() > 1 && !is_connected(cfg.graph)) {
    throw Error(ErrorKind::topology, "communication graph is not connected");
  }
  if (!(cfg.init_lo <= cfg.init_hi)) throw Error(ErrorKind::usage, "initial range needs lo <= hi");
  for (const auto& a : cfg.agents) validate(a.disturbance);
}

namespace detail {

inline Eigen::VectorXd initial_state(const SimConfig& cfg, const ClosedLoop& loop) {
  Eigen::VectorXd s(loop.dim());
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> dist(cfg.init_lo, cfg.init_hi);
  for (std::size_t i = 0; i < cfg.agents.size(); ++i) {
    const auto& a = loop.agents()[i];
    const auto& ic = cfg.agents[i].initial;
    if (ic) {
      if (static_cast<int>(ic->x.size()) != a.nx) {
        throw Error(ErrorKind::invalid_dimension, "initial state of agent " + std::to_string(i + 1) +
                                                      " has " + std::to_string(ic->x.size()) + " entries, plant needs " +
                                                      std::to_string(a.nx));
      }
      for (int k = 0; k < a.nx; ++k) s(a.x_off + k) = ic->x[static_cast<std::size_t>(k)];
      s(a.lambda_off) = ic->lambda;
      s(a.z_off) = ic->z;
      if (a.neta > 0) {
        if (ic->eta.empty()) {
          s.segment(a.eta_off, a.neta).setZero();
        } else if (static_cast<int>(ic->eta.size()) == a.neta) {
          for (int k = 0; k < a.neta; ++k) s(a.eta_off + k) = ic->eta[static_cast<std::size_t>(k)];
        } else {
          throw Error(ErrorKind::invalid_dimension, "initial observer state of agent " + std::to_string(i + 1) +
                                                        " has the wrong length");
        }
      }
    } else {
      for (int k = 0; k < a.nx; ++k) s(a.x_off + k) = dist(rng);
      s(a.lambda_off) = dist(rng);
      s(a.z_off) = dist(rng);
      for (int k = 0; k < a.neta; ++k) s(a.eta_off + k) = dist(rng);
    }
  }
  return s;
}

inline Eigen::MatrixXd numerical_jacobian(const ClosedLoop& loop, const Eigen::VectorXd& s, bool d_eps) {
  const int n = loop.dim();
  Eigen::MatrixXd J(n, n);
  for (int k = 0; k < n; ++k) {
    const double h = 1e-6 * (1.0 + std::abs(s(k)));
    Eigen::VectorXd sp = s, sm = s;
    sp(k) += h;
    sm(k) -= h;
    J.col(k) = (loop.derivative(0.0, -1, sp, d_eps) - loop.derivative(0.0, -1, sm, d_eps)) / (2.0 * h);
  }
  return J;
}

}  // namespace detail

inline Trajectory integrate(const SimConfig& cfg) {
  validate(cfg);
  const ResolvedGamma rg = resolve_gamma(cfg);
  ControllerParams params;
  params.gamma = rg.gamma;
  params.mode = cfg.controller.mode;
  params.override_gamma = cfg.controller.override_gamma;
  params.feedforward = cfg.controller.feedforward;

  const detail::ClosedLoop loop(cfg, params);
  Trajectory tr;
  tr.gamma = rg.gamma;
  if (rg.warning) tr.warnings.push_back(*rg.warning);
  tr.d0 = nominal_observations(cfg);
  const auto costs = effective_costs(cfg);
  tr.oracle = solve_allocation(costs, tr.d0);

  for (const auto& a : loop.agents()) {
    if (a.gain && !(a.gain->spectral_abscissa < 0.0)) {
      tr.warnings.push_back("observer gain does not make S - L D Hurwitz (spectral abscissa " +
                            std::to_string(a.gain->spectral_abscissa) + ")");
    }
  }

  Eigen::VectorXd s = detail::initial_state(cfg, loop);

  {
    Eigen::EigenSolver<Eigen::MatrixXd> es(detail::numerical_jacobian(loop, s, cfg.d_eps_initial), false);
    const double rho = es.eigenvalues().cwiseAbs().maxCoeff();
    if (rho > 0.0 && cfg.dt > 0.1 / rho) {
      tr.warnings.push_back("dt = " + std::to_string(cfg.dt) + " exceeds a tenth of the fastest time constant (" +
                            std::to_string(1.0 / rho) + ")");
    }
  }

  const long long steps = std::max<long long>(1, std::llround(cfg.horizon / cfg.dt));
  std::vector<std::pair<long long, bool>> events;
  for (const auto& e : cfg.events) events.emplace_back(std::llround(e.time / cfg.dt), e.enable_d_eps);
  std::stable_sort(events.begin(), events.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t next_event = 0;
  bool d_eps = cfg.d_eps_initial;

  const auto record = [&](long long k) {
    const double t = static_cast<double>(k) * cfg.dt;
    Sample smp;
    smp.t = t;
    smp.d_eps_active = d_eps;
    double mean_lambda = 0.0;
    double err2 = 0.0;
    for (std::size_t i = 0; i < loop.agents().size(); ++i) {
      const auto& a = loop.agents()[i];
      AgentSample as;
      as.x = s.segment(a.x_off, a.nx);
      as.y = a.plant.output(as.x);
      as.u = loop.input(i, s, t);
      as.lambda = s(a.lambda_off);
      as.z = s(a.z_off);
      as.eta = s.segment(a.eta_off, a.neta);
      as.d = loop.observation(a, t, k);
      mean_lambda += as.lambda;
      const double e = as.y - tr.oracle.y_star[i];
      err2 += e * e;
      smp.agents.push_back(std::move(as));
    }
    mean_lambda /= static_cast<double>(smp.agents.size());
    smp.err_opt = std::sqrt(err2);
    for (const auto& a : smp.agents) smp.err_consensus = std::max(smp.err_consensus, std::abs(a.lambda - mean_lambda));
    tr.samples.push_back(std::move(smp));
  };

  for (long long k = 0; k <= steps; ++k) {
    while (next_event < events.size() && events[next_event].first <= k) d_eps = events[next_event++].second;
    if (k % cfg.record_every == 0 || k == steps) record(k);
    if (k == steps) break;

    const double t = static_cast<double>(k) * cfg.dt;
    const auto f = [&](double tau, const Eigen::VectorXd& x) { return loop.derivative(tau, k, x, d_eps); };
    try {
      s = rk4_step<Eigen::VectorXd>(f, t, s, cfg.dt);
    } catch (const Error& e) {
      // A blow-up inside an RK4 stage surfaces as a non-finite control input.
      if (e.kind() != ErrorKind::numeric) throw;
      throw Error(ErrorKind::divergence, std::string("integration diverged: ") + e.what());
    }

    if (!s.allFinite()) {
      std::size_t bad = 0;
      for (std::size_t i = 0; i < loop.agents().size(); ++i) {
        const auto& a = loop.agents()[i];
        const int end = a.eta_off + a.neta;
        if (!s.segment(a.x_off, end - a.x_off).allFinite()) {
          bad = i;
          break;
        }
      }
      throw Error(ErrorKind::divergence, "state of agent " + std::to_string(bad + 1) + " became non-finite at t = " +
                                             std::to_string(static_cast<double>(k + 1) * cfg.dt));
    }
  }
  return tr;
}

struct SteadyState {
  std::vector<double> mean_output;
  double max_derivative_norm;
};

/// Averages over the trailing `window` fraction of samples. The derivative
/// norm is the largest finite-difference rate of the full recorded state.
inline SteadyState steady_state_metrics(const Trajectory& tr, double window) {
  if (tr.samples.empty()) throw Error(ErrorKind::empty, "trajectory has no samples");
  if (!(window > 0.0 && window <= 1.0)) throw Error(ErrorKind::usage, "window must lie in (0, 1]");
  const std::size_t n = tr.samples.size();
  const std::size_t count = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(window * static_cast<double>(n))), 1, n);
  const std::size_t first = n - count;

  SteadyState out;
  out.mean_output.assign(tr.samples.front().agents.size(), 0.0);
  for (std::size_t k = first; k < n; ++k) {
    for (std::size_t i = 0; i < out.mean_output.size(); ++i) out.mean_output[i] += tr.samples[k].agents[i].y;
  }
  for (auto& m : out.mean_output) m /= static_cast<double>(count);

  out.max_derivative_norm = 0.0;
  for (std::size_t k = first + 1; k < n; ++k) {
    const auto& a = tr.samples[k - 1];
    const auto& b = tr.samples[k];
    const double dt = b.t - a.t;
    if (!(dt > 0.0)) continue;
    double sq = 0.0;
    for (std::size_t i = 0; i < a.agents.size(); ++i) {
      sq += (b.agents[i].x - a.agents[i].x).squaredNorm();
      sq += (b.agents[i].eta - a.agents[i].eta).squaredNorm();
      sq += std::pow(b.agents[i].lambda - a.agents[i].lambda, 2) + std::pow(b.agents[i].z - a.agents[i].z, 2);
    }
    out.max_derivative_norm = std::max(out.max_derivative_norm, std::sqrt(sq) / dt);
  }
  return out;
}

/// Largest V_i' - (y_i - y_i*)(u_i - u_i*) over all recorded samples and agents,
/// with y* from the oracle. Positive values mean the dissipation inequality failed.
inline double trajectory_passivity_excess(const SimConfig& cfg, const Trajectory& tr, double h = 1e-7) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& smp : tr.samples) {
    for (std::size_t i = 0; i < smp.agents.size(); ++i) {
      const auto& p = cfg.agents[i].plant;
      const auto& a = smp.agents[i];
      const double ystar = tr.oracle.y_star[i];
      worst = std::max(worst, storage_rate(p, a.x, a.u, ystar, h) - supply_rate(p, a.x, a.u, ystar));
    }
  }
  return worst;
}

inline double sum_z(const Sample& s) {
  double v = 0.0;
  for (const auto& a : s.agents) v += a.z;
  return v;
}

}  // namespace palloc
