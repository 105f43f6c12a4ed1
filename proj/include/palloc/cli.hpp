#pragma once

// `run` and `report` commands. Exit codes: 0 pass, 1 error, 2 check failed.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <future>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "palloc/config.hpp"
#include "palloc/error.hpp"
#include "palloc/experiment.hpp"
#include "palloc/export.hpp"
#include "palloc/sim.hpp"

namespace palloc::cli {

inline constexpr int kPass = 0;
inline constexpr int kError = 1;
inline constexpr int kFail = 2;

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<double> horizon;
  std::optional<int> record_every;
  std::optional<double> override_gamma;
  std::filesystem::path out = "out";
  int jobs = 1;
};

/// A preset name, or a config file evaluated with the custom checks.
struct Target {
  PresetKind kind;
  std::string path;
};

inline std::vector<Target> parse_targets(const std::vector<std::string>& args) {
  std::vector<Target> out;
  for (std::size_t k = 0; k < args.size(); ++k) {
    const auto kind = preset_kind(args[k]);
    if (kind == PresetKind::custom) {
      if (k + 1 >= args.size()) throw Error(ErrorKind::usage, "custom needs a config file path");
      out.push_back({PresetKind::custom, args[++k]});
    } else if (kind) {
      out.push_back({*kind, {}});
    } else {
      out.push_back({PresetKind::custom, args[k]});
    }
  }
  if (out.empty()) throw Error(ErrorKind::usage, "run needs a preset name or config file");
  return out;
}

inline SimConfig resolve_config(const Target& target, const RunOptions& opt) {
  SimConfig cfg = target.kind == PresetKind::custom ? config::load_config(target.path, opt.seed)
                                                    : make_preset(target.kind, opt.seed.value_or(1));
  if (opt.dt) {
    // Keep the same recorded time spacing when the step changes.
    const double spacing = cfg.dt * cfg.record_every;
    cfg.dt = *opt.dt;
    cfg.record_every = std::max(1, static_cast<int>(std::lround(spacing / cfg.dt)));
  }
  if (opt.horizon) cfg.horizon = *opt.horizon;
  if (opt.record_every) cfg.record_every = *opt.record_every;
  if (opt.override_gamma) {
    cfg.controller.gamma = *opt.override_gamma;
    cfg.controller.override_gamma = true;
  }
  return cfg;
}

/// Runs one target, writing the human-readable summary to `log`.
inline int run_one(const Target& target, const RunOptions& opt, std::ostream& log) {
  try {
    const SimConfig cfg = resolve_config(target, opt);
    log << "== " << cfg.name << " (" << to_string(target.kind) << " checks, seed " << cfg.seed << ") ==\n";
    const auto start = std::chrono::steady_clock::now();
    const double bound = resolve_gamma(cfg).bound;
    const Trajectory tr = integrate(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const auto& w : tr.warnings) log << "warning: " << w << "\n";

    log << "gamma " << tr.gamma << " (bound " << bound << "), dt " << cfg.dt << ", horizon " << cfg.horizon << ", "
        << tr.size() << " samples, " << secs << " s\n";
    log << "oracle: y* = " << detail::vec(tr.oracle.y_star) << ", lambda0 = " << tr.oracle.lambda0
        << ", KKT residual " << detail::sci(tr.oracle.kkt_residual) << "\n";
    const std::size_t last = tr.size() - 1;
    log << "final: y = " << detail::vec(tr.outputs(last)) << ", err_opt " << detail::sci(tr.samples[last].err_opt)
        << "\n";
    const auto ss = steady_state_metrics(tr, 0.1);
    log << "steady state (last 10%): mean y = " << detail::vec(ss.mean_output) << ", max state rate "
        << detail::sci(ss.max_derivative_norm) << "\n";
    const auto eq = equilibrium_residual(tr.outputs(last), tr.lambdas(last), tr.d0, effective_costs(cfg), tr.gamma);
    log << "equilibrium: lambda0 = " << eq.lambda0 << ", KKT residual " << detail::sci(eq.kkt_residual)
        << ", balance residual " << detail::sci(eq.balance_residual) << ", lambda spread "
        << detail::sci(eq.consensus_residual) << "\n";

    const Evaluation ev = evaluate(target.kind, cfg, tr);
    for (const auto& c : ev.checks) log << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    for (const auto& n : ev.notes) log << "note: " << n << "\n";

    const auto art = write_artifacts(opt.out, cfg, tr, bound);
    log << "wrote " << art.csv.string() << ", " << art.meta.string() << ", " << art.plot.string() << "\n";
    log << "RESULT " << cfg.name << ": " << (ev.passed() ? "PASS" : "FAIL") << "\n";
    return ev.passed() ? kPass : kFail;
  } catch (const Error& e) {
    log << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return kError;
  }
}

/// Runs every target, up to `opt.jobs` at a time, and prints the logs in
/// target order. Returns the worst exit code.
inline int run(const std::vector<std::string>& args, const RunOptions& opt, std::ostream& out) {
  std::vector<Target> targets;
  try {
    targets = parse_targets(args);
  } catch (const Error& e) {
    out << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return kError;
  }
  std::vector<std::string> logs(targets.size());
  std::vector<int> codes(targets.size(), kPass);
  const std::size_t jobs = static_cast<std::size_t>(std::max(1, opt.jobs));
  for (std::size_t first = 0; first < targets.size(); first += jobs) {
    std::vector<std::future<void>> batch;
    for (std::size_t k = first; k < std::min(targets.size(), first + jobs); ++k) {
      batch.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, [&, k] {
        std::ostringstream log;
        codes[k] = run_one(targets[k], opt, log);
        logs[k] = log.str();
      }));
    }
    for (auto& f : batch) f.get();
  }
  int worst = kPass;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    out << logs[k];
    if (codes[k] == kError || (codes[k] == kFail && worst != kError)) worst = codes[k];
  }
  return worst;
}

inline int report(const std::string& csv_path, std::ostream& out) {
  try {
    out << format_report(report_file(csv_path));
    return kPass;
  } catch (const Error& e) {
    out << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return kError;
  }
}

}  // namespace palloc::cli
