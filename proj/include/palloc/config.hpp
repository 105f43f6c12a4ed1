#pragma once

// Experiment config files: a small sectioned key = value format with
// bracketed arrays and brace-delimited inline tables, e.g.
//
//   [agent.1]
//   plant = {kind = "inventory", theta = 1.0, demand = 1.0}
//   cost  = {kind = "quadratic", a = 0.1, b = -0.05, c = 1.0}
//
// Node and agent indices are 1-based in files and 0-based in memory.

#include <charconv>
#include <cmath>
#include <cctype>
#include <complex>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "palloc/error.hpp"
#include "palloc/sim.hpp"

namespace palloc::config {

struct Value;
using Array = std::vector<Value>;
using Table = std::vector<std::pair<std::string, Value>>;

struct Value {
  struct Number {
    double value;
    std::string text;
  };
  std::variant<Number, bool, std::string, std::shared_ptr<Array>, std::shared_ptr<Table>> data;

  bool is_number() const { return std::holds_alternative<Number>(data); }
  bool is_array() const { return std::holds_alternative<std::shared_ptr<Array>>(data); }
  bool is_table() const { return std::holds_alternative<std::shared_ptr<Table>>(data); }
  bool is_string() const { return std::holds_alternative<std::string>(data); }
  bool is_bool() const { return std::holds_alternative<bool>(data); }
};

struct Section {
  std::string name;
  int line = 0;
  std::vector<std::pair<std::string, Value>> entries;
  std::vector<int> lines;
};

struct Document {
  std::vector<Section> sections;
};

namespace detail {

class LineParser {
 public:
  LineParser(std::string_view text, int line) : s_(text), line_(line) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::parse, "line " + std::to_string(line_) + ": " + msg);
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r')) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= s_.size();
  }
  bool consume(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!consume(c)) fail(std::string("expected '") + c + "'");
  }

  std::string key() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' ||
                                s_[pos_] == '.' || s_[pos_] == '-')) {
      ++pos_;
    }
    if (start == pos_) fail("expected a key");
    return std::string(s_.substr(start, pos_ - start));
  }

  Value value() {
    skip_ws();
    if (pos_ >= s_.size()) fail("missing value");
    const char c = s_[pos_];
    if (c == '"') return Value{string()};
    if (c == '[') {
      ++pos_;
      auto arr = std::make_shared<Array>();
      if (!consume(']')) {
        do {
          arr->push_back(value());
        } while (consume(','));
        expect(']');
      }
      return Value{arr};
    }
    if (c == '{') {
      ++pos_;
      auto tab = std::make_shared<Table>();
      if (!consume('}')) {
        do {
          std::string k = key();
          expect('=');
          tab->emplace_back(std::move(k), value());
        } while (consume(','));
        expect('}');
      }
      return Value{tab};
    }
    if (s_.substr(pos_, 4) == "true") {
      pos_ += 4;
      return Value{true};
    }
    if (s_.substr(pos_, 5) == "false") {
      pos_ += 5;
      return Value{false};
    }
    return Value{number()};
  }

 private:
  std::string string() {
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
      out.push_back(s_[pos_++]);
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  Value::Number number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                s_[pos_] == '-' || s_[pos_] == '+')) {
      ++pos_;
    }
    std::string text(s_.substr(start, pos_ - start));
    const char* b = text.data();
    const char* e = text.data() + text.size();
    if (!text.empty() && *b == '+') ++b;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e || text.empty()) fail("bad number '" + text + "'");
    return {v, std::move(text)};
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_;
};

inline std::string_view strip_comment(std::string_view line) {
  bool in_string = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    if (line[k] == '"' && (k == 0 || line[k - 1] != '\\')) in_string = !in_string;
    if (line[k] == '#' && !in_string) return line.substr(0, k);
  }
  return line;
}

}  // namespace detail

inline Document parse(std::string_view text) {
  Document doc;
  doc.sections.push_back({"", 0, {}, {}});
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const std::string_view line = detail::strip_comment(text.substr(start, end - start));
    detail::LineParser p(line, line_no);
    if (!p.at_end()) {
      if (p.consume('[')) {
        std::string name = p.key();
        p.expect(']');
        if (!p.at_end()) p.fail("trailing characters after section header");
        for (const auto& s : doc.sections) {
          if (s.name == name) p.fail("duplicate section [" + name + "]");
        }
        doc.sections.push_back({std::move(name), line_no, {}, {}});
      } else {
        std::string k = p.key();
        p.expect('=');
        Value v = p.value();
        if (!p.at_end()) p.fail("trailing characters after value");
        auto& sec = doc.sections.back();
        for (const auto& [existing, _] : sec.entries) {
          if (existing == k) p.fail("duplicate key '" + k + "'");
        }
        sec.entries.emplace_back(std::move(k), std::move(v));
        sec.lines.push_back(line_no);
      }
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Typed access

namespace detail {

struct Ctx {
  std::string where;
  [[noreturn]] void fail(const std::string& msg) const { throw Error(ErrorKind::parse, where + ": " + msg); }
};

inline double as_number(const Value& v, const Ctx& c) {
  if (!v.is_number()) c.fail("expected a number");
  return std::get<Value::Number>(v.data).value;
}
inline bool as_bool(const Value& v, const Ctx& c) {
  if (!v.is_bool()) c.fail("expected true or false");
  return std::get<bool>(v.data);
}
inline std::string as_string(const Value& v, const Ctx& c) {
  if (!v.is_string()) c.fail("expected a string");
  return std::get<std::string>(v.data);
}
inline const Array& as_array(const Value& v, const Ctx& c) {
  if (!v.is_array()) c.fail("expected an array");
  return *std::get<std::shared_ptr<Array>>(v.data);
}
inline const Table& as_table(const Value& v, const Ctx& c) {
  if (!v.is_table()) c.fail("expected an inline table");
  return *std::get<std::shared_ptr<Table>>(v.data);
}
inline std::vector<double> as_numbers(const Value& v, const Ctx& c) {
  std::vector<double> out;
  for (const auto& e : as_array(v, c)) out.push_back(as_number(e, c));
  return out;
}
inline int as_int(const Value& v, const Ctx& c) {
  const double d = as_number(v, c);
  if (d != std::floor(d) || std::abs(d) > 1e9) c.fail("expected an integer");
  return static_cast<int>(d);
}
inline std::uint64_t as_u64(const Value& v, const Ctx& c) {
  if (!v.is_number()) c.fail("expected an unsigned integer");
  const std::string& t = std::get<Value::Number>(v.data).text;
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || ptr != t.data() + t.size()) c.fail("expected an unsigned integer");
  return out;
}

/// Tracks which keys of a table or section have been consumed so leftovers
/// can be rejected as typos.
class Fields {
 public:
  Fields(const std::vector<std::pair<std::string, Value>>& entries, Ctx ctx) : entries_(entries), ctx_(std::move(ctx)) {
    used_.assign(entries.size(), false);
  }

  const Value* find(std::string_view key) {
    for (std::size_t k = 0; k < entries_.size(); ++k) {
      if (entries_[k].first == key) {
        used_[k] = true;
        return &entries_[k].second;
      }
    }
    return nullptr;
  }
  const Value& require(std::string_view key) {
    const Value* v = find(key);
    if (v == nullptr) ctx_.fail("missing key '" + std::string(key) + "'");
    return *v;
  }
  Ctx at(std::string_view key) const { return {ctx_.where + "." + std::string(key)}; }
  double number(std::string_view key) { return as_number(require(key), at(key)); }
  double number_or(std::string_view key, double fallback) {
    const Value* v = find(key);
    return v ? as_number(*v, at(key)) : fallback;
  }
  void finish() const {
    for (std::size_t k = 0; k < entries_.size(); ++k) {
      if (!used_[k]) ctx_.fail("unknown key '" + entries_[k].first + "'");
    }
  }
  const Ctx& ctx() const { return ctx_; }

 private:
  const std::vector<std::pair<std::string, Value>>& entries_;
  Ctx ctx_;
  std::vector<bool> used_;
};

inline Plant read_plant(const Value& v, const Ctx& c) {
  Fields f(as_table(v, c), c);
  const std::string kind = as_string(f.require("kind"), f.at("kind"));
  Plant p;
  if (kind == "integrator") {
    p = plants::SingleIntegrator{};
  } else if (kind == "inventory") {
    p = plants::Inventory{f.number("theta"), f.number("demand")};
  } else if (kind == "chua") {
    plants::ChuaPassivated ch;
    ch.alpha = f.number_or("alpha", ch.alpha);
    ch.beta = f.number_or("beta", ch.beta);
    ch.a = f.number_or("a", ch.a);
    ch.b = f.number_or("b", ch.b);
    ch.c = f.number_or("c", ch.c);
    p = ch;
  } else if (kind == "nonminphase") {
    plants::NonMinPhase nm;
    nm.e1 = f.number_or("e1", nm.e1);
    nm.e2 = f.number_or("e2", nm.e2);
    nm.e3 = f.number_or("e3", nm.e3);
    nm.e4 = f.number_or("e4", nm.e4);
    nm.e5 = f.number_or("e5", nm.e5);
    p = nm;
  } else {
    c.fail("unknown plant kind '" + kind + "'");
  }
  f.finish();
  return p;
}

inline CostFunction read_cost(const Value& v, const Ctx& c) {
  Fields f(as_table(v, c), c);
  const std::string kind = as_string(f.require("kind"), f.at("kind"));
  CostFunction cost;
  if (kind == "quadratic") {
    try {
      cost = CostFunction::quadratic(f.number("a"), f.number_or("b", 0.0), f.number_or("c", 0.0));
    } catch (const Error& e) {
      c.fail(e.what());
    }
  } else if (kind == "nmp1") {
    cost = costs::Nmp1{};
  } else if (kind == "nmp2") {
    cost = costs::Nmp2{};
  } else if (kind == "nmp3") {
    cost = costs::Nmp3{};
  } else if (kind == "nmp4") {
    cost = costs::Nmp4{};
  } else {
    c.fail("unknown cost kind '" + kind + "'");
  }
  f.finish();
  return cost;
}

}  // namespace detail

/// Builds a SimConfig from a parsed document. Sections [run] and [solution]
/// (written into run metadata) are accepted and ignored.
/// `seed_override` replaces the file's seed before any phases are drawn.
inline SimConfig from_document(const Document& doc, std::optional<std::uint64_t> seed_override = std::nullopt) {
  using namespace detail;
  SimConfig cfg;
  std::map<int, AgentConfig> agents;
  std::optional<int> nodes;
  std::vector<std::pair<int, int>> edges;
  std::vector<double> weights;

  // [experiment] goes first: its seed determines the phases drawn for agents.
  std::vector<const Section*> order;
  for (const auto& sec : doc.sections) {
    if (sec.name == "experiment") order.insert(order.begin(), &sec);
    else order.push_back(&sec);
  }
  for (const Section* sp : order) {
    const Section& sec = *sp;
    Fields f(sec.entries, Ctx{sec.name.empty() ? "top level" : "[" + sec.name + "]"});
    if (sec.name.empty()) {
      f.finish();
    } else if (sec.name == "run" || sec.name == "solution") {
      continue;
    } else if (sec.name == "experiment") {
      if (const Value* v = f.find("name")) cfg.name = as_string(*v, f.at("name"));
      cfg.dt = f.number_or("dt", cfg.dt);
      cfg.horizon = f.number_or("horizon", cfg.horizon);
      if (const Value* v = f.find("record_every")) cfg.record_every = as_int(*v, f.at("record_every"));
      if (const Value* v = f.find("seed")) cfg.seed = as_u64(*v, f.at("seed"));
      if (seed_override) cfg.seed = *seed_override;
      if (const Value* v = f.find("init_range")) {
        const auto r = as_numbers(*v, f.at("init_range"));
        if (r.size() != 2) f.at("init_range").fail("expected [lo, hi]");
        cfg.init_lo = r[0];
        cfg.init_hi = r[1];
      }
      if (const Value* v = f.find("curvature_interval")) {
        const auto r = as_numbers(*v, f.at("curvature_interval"));
        if (r.size() != 2) f.at("curvature_interval").fail("expected [lo, hi]");
        cfg.curvature.lo = r[0];
        cfg.curvature.hi = r[1];
      }
      if (const Value* v = f.find("curvature_samples")) cfg.curvature.samples = as_int(*v, f.at("curvature_samples"));
      f.finish();
    } else if (sec.name == "graph") {
      nodes = as_int(f.require("nodes"), f.at("nodes"));
      for (const auto& e : as_array(f.require("edges"), f.at("edges"))) {
        const auto pair = as_numbers(e, f.at("edges"));
        if (pair.size() != 2) f.at("edges").fail("each edge needs two node indices");
        edges.emplace_back(static_cast<int>(pair[0]) - 1, static_cast<int>(pair[1]) - 1);
      }
      if (const Value* v = f.find("weights")) weights = as_numbers(*v, f.at("weights"));
      f.finish();
    } else if (sec.name == "controller") {
      if (const Value* v = f.find("gamma")) cfg.controller.gamma = as_number(*v, f.at("gamma"));
      if (const Value* v = f.find("mode")) {
        const std::string m = as_string(*v, f.at("mode"));
        if (m == "full") cfg.controller.mode = ControlMode::full;
        else if (m == "no_disturbance") cfg.controller.mode = ControlMode::no_disturbance;
        else if (m == "average_consensus") cfg.controller.mode = ControlMode::average_consensus;
        else f.at("mode").fail("unknown mode '" + m + "'");
      }
      if (const Value* v = f.find("override_gamma")) cfg.controller.override_gamma = as_bool(*v, f.at("override_gamma"));
      if (const Value* v = f.find("feedforward")) cfg.controller.feedforward = as_bool(*v, f.at("feedforward"));
      if (const Value* v = f.find("d_eps_initial")) cfg.d_eps_initial = as_bool(*v, f.at("d_eps_initial"));
      f.finish();
    } else if (sec.name == "events") {
      if (const Value* v = f.find("schedule")) {
        for (const auto& e : as_array(*v, f.at("schedule"))) {
          Fields ef(as_table(e, f.at("schedule")), f.at("schedule"));
          Event ev;
          ev.time = ef.number("time");
          const std::string action = as_string(ef.require("action"), ef.at("action"));
          if (action == "enable_d_eps") ev.enable_d_eps = true;
          else if (action == "disable_d_eps") ev.enable_d_eps = false;
          else ef.at("action").fail("unknown action '" + action + "'");
          ef.finish();
          cfg.events.push_back(ev);
        }
      }
      f.finish();
    } else if (sec.name.rfind("agent.", 0) == 0) {
      int index = 0;
      const std::string num = sec.name.substr(6);
      const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), index);
      if (ec != std::errc() || ptr != num.data() + num.size() || index < 1) f.ctx().fail("bad agent index");
      AgentConfig a;
      a.plant = read_plant(f.require("plant"), f.at("plant"));
      a.cost = read_cost(f.require("cost"), f.at("cost"));
      if (const Value* v = f.find("disturbance")) {
        Fields df(as_table(*v, f.at("disturbance")), f.at("disturbance"));
        a.disturbance.d0 = df.number("d0");
        if (const Value* w = df.find("freqs")) a.disturbance.freqs = as_numbers(*w, df.at("freqs"));
        if (const Value* w = df.find("amplitudes")) {
          a.disturbance.amplitudes = as_numbers(*w, df.at("amplitudes"));
        } else {
          a.disturbance.amplitudes.assign(a.disturbance.freqs.size(), 1.0);
        }
        if (const Value* w = df.find("phases")) {
          a.disturbance.phases = as_numbers(*w, df.at("phases"));
        } else {
          a.disturbance.phases = draw_phases(cfg.seed, index - 1, a.disturbance.freqs.size());
        }
        a.disturbance.onset = df.number_or("onset", 0.0);
        df.finish();
      }
      if (const Value* v = f.find("observer")) {
        Fields of(as_table(*v, f.at("observer")), f.at("observer"));
        if (const Value* w = of.find("L")) a.observer.L = as_numbers(*w, of.at("L"));
        std::vector<double> re, im;
        if (const Value* w = of.find("poles")) re = as_numbers(*w, of.at("poles"));
        if (const Value* w = of.find("poles_imag")) im = as_numbers(*w, of.at("poles_imag"));
        if (!im.empty() && im.size() != re.size()) of.at("poles_imag").fail("length differs from poles");
        for (std::size_t k = 0; k < re.size(); ++k) a.observer.poles.emplace_back(re[k], im.empty() ? 0.0 : im[k]);
        if (!a.observer.L.empty() && !a.observer.poles.empty()) of.ctx().fail("give either L or poles, not both");
        of.finish();
      }
      if (const Value* v = f.find("initial")) {
        Fields inf(as_table(*v, f.at("initial")), f.at("initial"));
        InitialCondition ic;
        ic.x = as_numbers(inf.require("x"), inf.at("x"));
        ic.lambda = inf.number_or("lambda", 0.0);
        ic.z = inf.number_or("z", 0.0);
        if (const Value* w = inf.find("eta")) ic.eta = as_numbers(*w, inf.at("eta"));
        inf.finish();
        a.initial = std::move(ic);
      }
      f.finish();
      if (!agents.emplace(index, std::move(a)).second) f.ctx().fail("duplicate agent");
    } else {
      f.ctx().fail("unknown section");
    }
  }

  if (!nodes) throw Error(ErrorKind::parse, "missing [graph] section");
  try {
    cfg.graph = Graph::from_edges(*nodes, edges, weights);
  } catch (const Error& e) {
    throw Error(ErrorKind::parse, std::string("[graph]: ") + e.what());
  }
  for (int i = 1; i <= *nodes; ++i) {
    auto it = agents.find(i);
    if (it == agents.end()) throw Error(ErrorKind::parse, "missing section [agent." + std::to_string(i) + "]");
    cfg.agents.push_back(std::move(it->second));
    agents.erase(it);
  }
  if (!agents.empty()) {
    throw Error(ErrorKind::parse, "agent index " + std::to_string(agents.begin()->first) + " exceeds node count");
  }
  return cfg;
}

inline SimConfig parse_config(std::string_view text, std::optional<std::uint64_t> seed_override = std::nullopt) {
  SimConfig cfg = from_document(parse(text), seed_override);
  if (seed_override) cfg.seed = *seed_override;
  return cfg;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline SimConfig load_config(const std::string& path, std::optional<std::uint64_t> seed_override = std::nullopt) {
  return parse_config(read_file(path), seed_override);
}

// ---------------------------------------------------------------------------
// Serialization

/// Shortest decimal form that parses back to the same double.
inline std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

inline std::string fmt(std::span<const double> v) {
  std::string s = "[";
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + fmt(v[k]);
  return s + "]";
}

inline std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

inline std::string plant_text(const Plant& p) {
  return std::visit(
      [](const auto& m) -> std::string {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, plants::SingleIntegrator>) {
          return "{kind = \"integrator\"}";
        } else if constexpr (std::is_same_v<T, plants::Inventory>) {
          return "{kind = \"inventory\", theta = " + fmt(m.theta) + ", demand = " + fmt(m.demand) + "}";
        } else if constexpr (std::is_same_v<T, plants::ChuaPassivated>) {
          return "{kind = \"chua\", alpha = " + fmt(m.alpha) + ", beta = " + fmt(m.beta) + ", a = " + fmt(m.a) +
                 ", b = " + fmt(m.b) + ", c = " + fmt(m.c) + "}";
        } else if constexpr (std::is_same_v<T, plants::NonMinPhase>) {
          return "{kind = \"nonminphase\", e1 = " + fmt(m.e1) + ", e2 = " + fmt(m.e2) + ", e3 = " + fmt(m.e3) +
                 ", e4 = " + fmt(m.e4) + ", e5 = " + fmt(m.e5) + "}";
        } else {
          throw Error(ErrorKind::usage, "user-defined plant '" + m.name + "' cannot be written to a config file");
        }
      },
      p.model());
}

inline std::string cost_text(const CostFunction& c) {
  if (const auto* q = std::get_if<costs::Quadratic>(&c.model())) {
    return "{kind = \"quadratic\", a = " + fmt(q->a) + ", b = " + fmt(q->b) + ", c = " + fmt(q->c) + "}";
  }
  return "{kind = \"" + c.name() + "\"}";
}

inline std::string to_text(const SimConfig& cfg) {
  std::ostringstream o;
  o << "[experiment]\n"
    << "name = " << quoted(cfg.name) << "\n"
    << "dt = " << fmt(cfg.dt) << "\n"
    << "horizon = " << fmt(cfg.horizon) << "\n"
    << "record_every = " << cfg.record_every << "\n"
    << "seed = " << cfg.seed << "\n"
    << "init_range = [" << fmt(cfg.init_lo) << ", " << fmt(cfg.init_hi) << "]\n"
    << "curvature_interval = [" << fmt(cfg.curvature.lo) << ", " << fmt(cfg.curvature.hi) << "]\n"
    << "curvature_samples = " << cfg.curvature.samples << "\n\n";

  o << "[graph]\n" << "nodes = " << cfg.graph.size() << "\n";
  std::string edges = "[";
  std::vector<double> weights;
  bool unit = true;
  for (int i = 0; i < cfg.graph.size(); ++i) {
    for (int j = i + 1; j < cfg.graph.size(); ++j) {
      const double w = cfg.graph.weight(i, j);
      if (w > 0.0) {
        edges += (weights.empty() ? "[" : ", [") + std::to_string(i + 1) + ", " + std::to_string(j + 1) + "]";
        weights.push_back(w);
        unit = unit && w == 1.0;
      }
    }
  }
  o << "edges = " << edges << "]\n";
  if (!unit) o << "weights = " << fmt(weights) << "\n";
  o << "\n";

  o << "[controller]\n";
  if (cfg.controller.gamma) o << "gamma = " << fmt(*cfg.controller.gamma) << "\n";
  o << "mode = " << quoted(to_string(cfg.controller.mode)) << "\n"
    << "override_gamma = " << (cfg.controller.override_gamma ? "true" : "false") << "\n"
    << "feedforward = " << (cfg.controller.feedforward ? "true" : "false") << "\n"
    << "d_eps_initial = " << (cfg.d_eps_initial ? "true" : "false") << "\n\n";

  o << "[events]\nschedule = [";
  for (std::size_t k = 0; k < cfg.events.size(); ++k) {
    o << (k ? ", " : "") << "{time = " << fmt(cfg.events[k].time) << ", action = "
      << (cfg.events[k].enable_d_eps ? "\"enable_d_eps\"" : "\"disable_d_eps\"") << "}";
  }
  o << "]\n";

  for (std::size_t i = 0; i < cfg.agents.size(); ++i) {
    const auto& a = cfg.agents[i];
    o << "\n[agent." << i + 1 << "]\n"
      << "plant = " << plant_text(a.plant) << "\n"
      << "cost = " << cost_text(a.cost) << "\n"
      << "disturbance = {d0 = " << fmt(a.disturbance.d0) << ", freqs = " << fmt(a.disturbance.freqs)
      << ", amplitudes = " << fmt(a.disturbance.amplitudes) << ", phases = " << fmt(a.disturbance.phases)
      << ", onset = " << fmt(a.disturbance.onset) << "}\n";
    if (!a.observer.L.empty()) {
      o << "observer = {L = " << fmt(a.observer.L) << "}\n";
    } else if (!a.observer.poles.empty()) {
      std::vector<double> re, im;
      for (const auto& p : a.observer.poles) {
        re.push_back(p.real());
        im.push_back(p.imag());
      }
      o << "observer = {poles = " << fmt(re) << ", poles_imag = " << fmt(im) << "}\n";
    }
    if (a.initial) {
      o << "initial = {x = " << fmt(a.initial->x) << ", lambda = " << fmt(a.initial->lambda)
        << ", z = " << fmt(a.initial->z) << ", eta = " << fmt(a.initial->eta) << "}\n";
    }
  }
  return o.str();
}

}  // namespace palloc::config
