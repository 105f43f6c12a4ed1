#pragma once

#include <stdexcept>
#include <string>

namespace palloc {

enum class ErrorKind {
  invalid_dimension,
  invalid_graph,
  invalid_frequency,
  invalid_poles,
  design_infeasible,
  evaluation,
  unsupported_audit,
  non_strongly_convex,
  numeric,
  divergence,
  topology,
  unbounded,
  insufficient_data,
  empty,
  parse,
  usage,
  io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_dimension: return "invalid dimension";
    case ErrorKind::invalid_graph: return "invalid graph";
    case ErrorKind::invalid_frequency: return "invalid frequency";
    case ErrorKind::invalid_poles: return "invalid poles";
    case ErrorKind::design_infeasible: return "design infeasible";
    case ErrorKind::evaluation: return "evaluation error";
    case ErrorKind::unsupported_audit: return "unsupported audit";
    case ErrorKind::non_strongly_convex: return "not strongly convex";
    case ErrorKind::numeric: return "numeric error";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::topology: return "topology error";
    case ErrorKind::unbounded: return "unbounded";
    case ErrorKind::insufficient_data: return "insufficient data";
    case ErrorKind::empty: return "empty input";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::usage: return "usage error";
    case ErrorKind::io: return "i/o error";
  }
  return "error";
}

/// Single exception type for the library; `kind()` tells callers what failed.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace palloc
