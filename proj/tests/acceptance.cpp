// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "palloc/cli.hpp"
#include "palloc/experiment.hpp"
#include "palloc/export.hpp"
#include "palloc/observer.hpp"
#include "palloc/oracle.hpp"
#include "palloc/sim.hpp"

using namespace palloc;
namespace fs = std::filesystem;
using cd = std::complex<double>;

namespace {

int failures = 0;
double worst_z_drift = 0.0;
std::size_t runs = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s %d %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string sci(double v) { return detail::sci(v); }

Trajectory simulate(const SimConfig& cfg) {
  Trajectory tr = integrate(cfg);
  const double z0 = sum_z(tr.samples.front());
  for (const auto& s : tr.samples) worst_z_drift = std::max(worst_z_drift, std::abs(sum_z(s) - z0));
  ++runs;
  return tr;
}

bool check_passed(const Evaluation& ev, const std::string& name, std::string& detail) {
  for (const auto& c : ev.checks) {
    if (c.name == name) {
      detail += (detail.empty() ? "" : "; ") + c.name + " " + c.detail;
      return c.passed;
    }
  }
  detail += (detail.empty() ? "" : "; ") + name + " missing";
  return false;
}

double final_relative_change(const SimConfig& cfg) {
  SimConfig half = cfg;
  half.dt = cfg.dt / 2;
  half.record_every = cfg.record_every * 2;
  const Trajectory a = simulate(cfg);
  const Trajectory b = simulate(half);
  const auto ya = a.outputs(a.size() - 1);
  const auto yb = b.outputs(b.size() - 1);
  double worst = 0.0;
  for (std::size_t i = 0; i < ya.size(); ++i) {
    worst = std::max(worst, std::abs(ya[i] - yb[i]) / std::max(std::abs(yb[i]), 1e-12));
  }
  return worst;
}

}  // namespace

int main() {
  const fs::path out = fs::temp_directory_path() / "palloc_acceptance";
  fs::remove_all(out);

  // 1. Inventory optimum.
  const SimConfig inv = inventory_preset(1);
  Trajectory inv_tr;
  {
    cli::RunOptions opt;
    opt.out = out;
    std::ostringstream log;
    const auto start = std::chrono::steady_clock::now();
    const int code = cli::run_one({PresetKind::inventory, {}}, opt, log);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    inv_tr = simulate(inv);
    const auto ys = inv_tr.outputs(inv_tr.size() - 1);
    double dev = 0.0;
    for (std::size_t i = 0; i < 4; ++i) dev = std::max(dev, std::abs(ys[i] - kInventoryOptimum[i]));

    std::vector<CostFunction> c;
    for (int i = 1; i <= 4; ++i) c.push_back(CostFunction::quadratic(0.1 * i, -0.05 * i, i));
    const std::vector<double> d0{1, 2, 3, 4};
    const auto sol = solve_allocation(c, d0);
    double odev = 0.0;
    for (std::size_t i = 0; i < 4; ++i) odev = std::max(odev, std::abs(sol.y_star[i] - kInventoryOptimum[i]));

    const bool ok = code == cli::kPass && dev <= 0.01 && odev <= 0.01 && sol.kkt_residual < 1e-9 && secs < 5.0;
    report(1, "inventory optimum", ok,
           "y = " + detail::vec(ys) + " (max deviation " + sci(dev) + "), oracle " + detail::vec(sol.y_star) +
               " KKT " + sci(sol.kkt_residual) + ", run exit " + std::to_string(code) + " in " + std::to_string(secs) +
               " s");
  }

  // 2. Exponential convergence.
  try {
    const auto fit = exp_rate_fit(inv_tr.times(), inv_tr.err_opt(), 1e-6);
    report(2, "exponential convergence", fit.r_squared > 0.99 && fit.rate > 0.0,
           "rate " + sci(fit.rate) + ", r^2 " + std::to_string(fit.r_squared) + " over samples " +
               std::to_string(fit.first) + ".." + std::to_string(fit.last));
  } catch (const Error& e) {
    report(2, "exponential convergence", false, e.what());
  }

  // 3. Oracle equivalence on random quadratic instances.
  {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> a(0.1, 2.0), b(-2.0, 2.0), d(-5.0, 5.0);
    double worst = 0.0;
    bool ok = true;
    for (int trial = 0; trial < 20; ++trial) {
      SimConfig cfg;
      cfg.name = "random_quadratic";
      cfg.graph = four_agent_graph();
      cfg.controller.mode = ControlMode::no_disturbance;
      cfg.seed = static_cast<std::uint64_t>(trial + 1);
      cfg.horizon = 100.0;
      cfg.record_every = 10;
      for (int i = 0; i < 4; ++i) {
        AgentConfig ag;
        ag.plant = plants::SingleIntegrator{};
        ag.cost = CostFunction::quadratic(a(rng), b(rng), 0.0);
        ag.disturbance.d0 = d(rng);
        cfg.agents.push_back(ag);
      }
      try {
        const Trajectory tr = simulate(cfg);
        const auto ss = steady_state_metrics(tr, 0.05);
        for (std::size_t i = 0; i < 4; ++i) worst = std::max(worst, std::abs(ss.mean_output[i] - tr.oracle.y_star[i]));
      } catch (const Error& e) {
        ok = false;
        std::printf("  trial %d: %s\n", trial, e.what());
      }
    }
    report(3, "oracle equivalence", ok && worst < 1e-3, "20 instances, max coordinate deviation " + sci(worst));
  }

  // 4. Average consensus with disturbance rejection.
  {
    const SimConfig cfg = chua_average_preset(1);
    const Trajectory tr = simulate(cfg);
    const Evaluation ev = evaluate(PresetKind::chua_average, cfg, tr);
    std::string d;
    bool ok = check_passed(ev, "consensus before onset", d);
    ok = check_passed(ev, "consensus disrupted by disturbance", d) && ok;
    ok = check_passed(ev, "consensus recovered at horizon", d) && ok;
    report(4, "average consensus with rejection", ok, d);
  }

  // 5. Non-minimum-phase KKT and three-phase timeline; 8 reuses the trajectory.
  const SimConfig nmp = nonminphase_preset(1);
  const Trajectory nmp_tr = simulate(nmp);
  {
    const Evaluation ev = evaluate(PresetKind::nonminphase, nmp, nmp_tr);
    std::string d;
    bool ok = check_passed(ev, "total demand", d);
    ok = check_passed(ev, "KKT residual at horizon", d) && ok;
    ok = check_passed(ev, "balance residual at horizon", d) && ok;
    ok = check_passed(ev, "three-phase timeline", d) && ok;
    const auto art = write_artifacts(out, nmp, nmp_tr, resolve_gamma(nmp).bound);
    const Report rep = report_file(art.csv);
    const bool phases = rep.phases.size() == 3 && rep.phases[1].start == 75.0 && rep.phases[2].start == 95.0;
    d += "; report phases " + std::to_string(rep.phases.size()) +
         (rep.phases.size() == 3 ? " starting " + std::to_string(rep.phases[1].start) + " s / " +
                                       std::to_string(rep.phases[2].start) + " s"
                                 : "");
    report(5, "non-minimum-phase KKT", ok && phases, d);
  }

  // 6. Observability.
  {
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<int> count(1, 4);
    std::uniform_real_distribution<double> freq(0.0, 10.0);
    int passed = 0;
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> f;
      const int k = count(rng);
      while (static_cast<int>(f.size()) < k) {
        const double w = 10.0 - freq(rng);
        if (std::none_of(f.begin(), f.end(), [&](double v) { return std::abs(v - w) < 1e-3; })) f.push_back(w);
      }
      if (observability_check(build_exosystem(f))) ++passed;
    }
    const auto good = build_exosystem({1.0, 2.0});
    Eigen::MatrixXd S = good.S();
    S(3, 4) = 1.0;
    S(4, 3) = -1.0;
    const bool dup_rejected = !observability_check(Exosystem::unchecked(S, good.D(), good.D_eps()));
    report(6, "observability", passed == 200 && dup_rejected,
           std::to_string(passed) + "/200 random sets observable, duplicated frequency " +
               (dup_rejected ? "rejected" : "accepted"));
  }

  // 7. Observer gains.
  {
    const std::vector<std::pair<double, Eigen::Vector3d>> cases{
        {3.0, {5.00, 6.72, 2.19}}, {2.0, {5.00, 6.51, 2.75}}, {1.0, {5.00, 6.07, 3.69}}};
    bool ok = true;
    std::string d = "abscissae";
    for (const auto& [w, L] : cases) {
      const auto g = make_gain(build_exosystem({w}), L);
      ok = ok && spectral_abscissa(g.closed_loop) < 0.0;
      d += " " + sci(g.spectral_abscissa);
    }
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> re(-6.0, -0.5), im(0.1, 3.0);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const std::vector<double> freqs{1.0 + trial % 3, 4.5};
      std::vector<cd> poles{{re(rng), 0.0}};
      for (int k = 0; k < 2; ++k) {
        if (trial % 2) {
          const cd p(re(rng), im(rng));
          poles.push_back(p);
          poles.push_back(std::conj(p));
        } else {
          poles.push_back({re(rng), 0.0});
          poles.push_back({re(rng), 0.0});
        }
      }
      const auto g = design_gain(build_exosystem(freqs), poles);
      worst = std::max(worst, pole_mismatch(closed_loop_poles(g), poles));
    }
    report(7, "observer gains", ok && worst < 1e-6, d + "; placed pole mismatch " + sci(worst) + " over 50 designs");
  }

  // 8. Passivity along closed-loop trajectories.
  {
    const double e_inv = trajectory_passivity_excess(inv, inv_tr);
    const double e_nmp = trajectory_passivity_excess(nmp, nmp_tr);
    report(8, "passivity audit", e_inv <= 1e-3 && e_nmp <= 1e-3,
           "max excess inventory " + sci(e_inv) + ", non-minimum-phase " + sci(e_nmp));
  }

  // 9. Conservation and step halving.
  {
    const double r_inv = final_relative_change(inv);
    const double r_chua = final_relative_change(chua_average_preset(1));
    const double r_nmp = final_relative_change(nmp);
    const double worst = std::max({r_inv, r_chua, r_nmp});
    report(9, "conservation and step halving", worst_z_drift < 1e-8 && worst < 1e-5,
           "sum z drift " + sci(worst_z_drift) + " over " + std::to_string(runs) +
               " runs; step-halving change inventory " + sci(r_inv) + ", chua " + sci(r_chua) + ", nmp " +
               sci(r_nmp));
  }

  fs::remove_all(out);
  std::printf("%s: %d of 9 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
