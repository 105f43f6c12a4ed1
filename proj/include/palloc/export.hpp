#pragma once

// Run artifacts: trajectory CSV, a metadata sidecar that is itself a
// loadable config, a gnuplot script, and the per-phase CSV report.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "palloc/config.hpp"
#include "palloc/error.hpp"
#include "palloc/experiment.hpp"
#include "palloc/sim.hpp"

namespace palloc {

inline std::string csv_header(int n) {
  std::string h = "t";
  for (const char* col : {"y", "u", "lambda", "z"}) {
    for (int i = 1; i <= n; ++i) h += "," + std::string(col) + std::to_string(i);
  }
  return h + ",err_opt,err_consensus";
}

inline std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

inline std::string trajectory_csv(const Trajectory& tr) {
  const int n = tr.samples.empty() ? 0 : static_cast<int>(tr.samples.front().agents.size());
  std::string out = csv_header(n) + "\n";
  for (const auto& s : tr.samples) {
    out += csv_number(s.t);
    for (const auto& a : s.agents) out += "," + csv_number(a.y);
    for (const auto& a : s.agents) out += "," + csv_number(a.u);
    for (const auto& a : s.agents) out += "," + csv_number(a.lambda);
    for (const auto& a : s.agents) out += "," + csv_number(a.z);
    out += "," + csv_number(s.err_opt) + "," + csv_number(s.err_consensus) + "\n";
  }
  return out;
}

/// Resolved config followed by [run] and [solution] sections.
inline std::string meta_text(const SimConfig& cfg, const Trajectory& tr, double gamma_bound) {
  using config::fmt;
  std::ostringstream o;
  o << config::to_text(cfg) << "\n[run]\n"
    << "solver = \"rk4 fixed step\"\n"
    << "dt = " << fmt(cfg.dt) << "\n"
    << "gamma = " << fmt(tr.gamma) << "\n"
    << "gamma_bound = " << fmt(gamma_bound) << "\n"
    << "samples = " << tr.size() << "\n";
  if (const auto pb = phase_boundaries(cfg)) {
    o << "onset = " << fmt(pb->onset) << "\n";
    if (pb->rejection) o << "rejection = " << fmt(*pb->rejection) << "\n";
  }
  o << "warnings = [";
  for (std::size_t k = 0; k < tr.warnings.size(); ++k) o << (k ? ", " : "") << config::quoted(tr.warnings[k]);
  o << "]\n\n[solution]\n"
    << "y_star = " << fmt(tr.oracle.y_star) << "\n"
    << "lambda0 = " << fmt(tr.oracle.lambda0) << "\n"
    << "objective = " << fmt(tr.oracle.objective) << "\n"
    << "kkt_residual = " << fmt(tr.oracle.kkt_residual) << "\n"
    << "balance_residual = " << fmt(tr.oracle.balance_residual) << "\n"
    << "iterations = " << tr.oracle.iterations << "\n";
  return o.str();
}

inline std::string gnuplot_script(const std::string& name, int n) {
  std::ostringstream o;
  o << "set datafile separator ','\n"
    << "set key autotitle columnhead\n"
    << "set xlabel 't'\n"
    << "set multiplot layout 2,1\n"
    << "set ylabel 'y'\n"
    << "plot for [i=2:" << n + 1 << "] '" << name << ".csv' using 1:i with lines\n"
    << "set logscale y\n"
    << "set ylabel 'error'\n"
    << "plot '" << name << ".csv' using 1:" << 4 * n + 2 << " with lines, '' using 1:" << 4 * n + 3
    << " with lines\n"
    << "unset multiplot\n";
  return o.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error(ErrorKind::io, "write to '" + path.string() + "' failed");
}

struct RunArtifacts {
  std::filesystem::path csv;
  std::filesystem::path meta;
  std::filesystem::path plot;
};

inline RunArtifacts write_artifacts(const std::filesystem::path& dir, const SimConfig& cfg, const Trajectory& tr,
                                    double gamma_bound) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create '" + dir.string() + "': " + ec.message());
  const int n = static_cast<int>(cfg.agents.size());
  RunArtifacts a{dir / (cfg.name + ".csv"), dir / (cfg.name + ".meta"), dir / (cfg.name + ".gp")};
  write_file(a.csv, trajectory_csv(tr));
  write_file(a.meta, meta_text(cfg, tr, gamma_bound));
  write_file(a.plot, gnuplot_script(cfg.name, n));
  return a;
}

// ---------------------------------------------------------------------------
// Report

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(std::string_view name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw Error(ErrorKind::parse, "missing column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - columns.begin());
  }
};

inline CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  int line_no = 0;
  std::size_t start = 0;
  bool terminated = true;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    terminated = end != std::string_view::npos;
    if (!terminated) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    start = end + 1;
    const auto fail = [&](const std::string& msg) {
      throw Error(ErrorKind::parse, "line " + std::to_string(line_no) + ": " + msg);
    };
    std::vector<std::string_view> fields;
    std::size_t p = 0;
    while (true) {
      const std::size_t q = line.find(',', p);
      fields.push_back(line.substr(p, q == std::string_view::npos ? std::string_view::npos : q - p));
      if (q == std::string_view::npos) break;
      p = q + 1;
    }
    if (line_no == 1) {
      for (auto f : fields) table.columns.emplace_back(f);
      if (table.columns.empty() || table.columns.front() != "t") fail("header must start with 't'");
      continue;
    }
    if (line.empty()) fail("empty row");
    if (fields.size() != table.columns.size()) {
      fail("expected " + std::to_string(table.columns.size()) + " fields, got " + std::to_string(fields.size()));
    }
    std::vector<double> row;
    for (auto f : fields) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size() || f.empty()) fail("bad number '" + std::string(f) + "'");
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  if (line_no == 0) throw Error(ErrorKind::parse, "line 1: empty file");
  if (!terminated) throw Error(ErrorKind::parse, "line " + std::to_string(line_no) + ": truncated final row");
  if (table.rows.empty()) throw Error(ErrorKind::parse, "line " + std::to_string(line_no + 1) + ": no data rows");
  return table;
}

struct PhaseStats {
  std::string name;
  double start;
  double end;
  std::size_t samples = 0;
  double err_opt_max = 0.0;
  double err_opt_mean = 0.0;
  double err_opt_final = 0.0;
  double err_consensus_max = 0.0;
  double err_consensus_final = 0.0;
};

struct Report {
  std::size_t agents = 0;
  std::size_t samples = 0;
  std::vector<PhaseStats> phases;
};

/// Phase boundaries come from the `onset` and `rejection` keys of the [run]
/// section in `meta_text` when given; otherwise the run is a single phase.
inline Report make_report(const CsvTable& table, std::optional<std::string_view> meta_text = std::nullopt) {
  const std::size_t t_col = table.column("t");
  const std::size_t e_col = table.column("err_opt");
  const std::size_t c_col = table.column("err_consensus");

  Report rep;
  rep.samples = table.rows.size();
  rep.agents = static_cast<std::size_t>(
      std::count_if(table.columns.begin(), table.columns.end(), [](const std::string& c) { return c.rfind("y", 0) == 0; }));

  std::vector<double> bounds;
  if (meta_text) {
    const auto doc = config::parse(*meta_text);
    for (const auto& sec : doc.sections) {
      if (sec.name != "run") continue;
      for (const auto& [key, value] : sec.entries) {
        if ((key == "onset" || key == "rejection") && value.is_number()) {
          bounds.push_back(std::get<config::Value::Number>(value.data).value);
        }
      }
    }
  }
  std::sort(bounds.begin(), bounds.end());

  const double t0 = table.rows.front()[t_col];
  const double t1 = table.rows.back()[t_col];
  std::vector<std::pair<std::string, std::pair<double, double>>> spans;
  if (bounds.empty()) {
    spans.push_back({"all", {t0, std::numeric_limits<double>::infinity()}});
  } else {
    static const char* names[] = {"pre-onset", "disturbed", "post-rejection"};
    double lo = t0;
    for (std::size_t k = 0; k <= bounds.size() && k < 3; ++k) {
      const double hi = k < bounds.size() ? bounds[k] : std::numeric_limits<double>::infinity();
      spans.push_back({names[k], {lo, hi}});
      lo = hi;
    }
  }

  for (const auto& [name, span] : spans) {
    PhaseStats ps{name, span.first, std::min(span.second, t1)};
    double sum = 0.0;
    for (const auto& row : table.rows) {
      const double t = row[t_col];
      if (t < span.first || t >= span.second) continue;
      ++ps.samples;
      ps.err_opt_max = std::max(ps.err_opt_max, row[e_col]);
      ps.err_consensus_max = std::max(ps.err_consensus_max, row[c_col]);
      ps.err_opt_final = row[e_col];
      ps.err_consensus_final = row[c_col];
      sum += row[e_col];
    }
    if (ps.samples > 0) ps.err_opt_mean = sum / static_cast<double>(ps.samples);
    rep.phases.push_back(ps);
  }
  return rep;
}

inline std::string format_report(const Report& rep) {
  std::ostringstream o;
  o << rep.agents << " agents, " << rep.samples << " samples, " << rep.phases.size() << " phase"
    << (rep.phases.size() == 1 ? "" : "s") << "\n";
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-15s %10s %10s %8s %12s %12s %12s %12s\n", "phase", "start", "end", "samples",
                "err_max", "err_mean", "err_final", "lambda_max");
  o << buf;
  for (const auto& p : rep.phases) {
    std::snprintf(buf, sizeof buf, "%-15s %10.3f %10.3f %8zu %12.4e %12.4e %12.4e %12.4e\n", p.name.c_str(), p.start,
                  p.end, p.samples, p.err_opt_max, p.err_opt_mean, p.err_opt_final, p.err_consensus_max);
    o << buf;
  }
  return o.str();
}

/// Reads `csv_path` and, if present, the sibling .meta file.
inline Report report_file(const std::filesystem::path& csv_path) {
  const CsvTable table = parse_csv(config::read_file(csv_path.string()));
  std::filesystem::path meta = csv_path;
  meta.replace_extension(".meta");
  if (std::filesystem::exists(meta)) {
    const std::string text = config::read_file(meta.string());
    return make_report(table, text);
  }
  return make_report(table);
}

}  // namespace palloc
