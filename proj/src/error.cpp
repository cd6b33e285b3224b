#include "fracopt/error.hpp"

namespace fracopt {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_grid: return "invalid-grid";
    case ErrorKind::incompatible_fields: return "incompatible-fields";
    case ErrorKind::invalid_label: return "invalid-label";
    case ErrorKind::self_pair: return "self-pair";
    case ErrorKind::degenerate_truncation: return "degenerate-truncation";
    case ErrorKind::domain: return "domain";
    case ErrorKind::step_too_large: return "step-too-large";
    case ErrorKind::solver_failure: return "solver-failure";
    case ErrorKind::invalid_target: return "invalid-target";
    case ErrorKind::unsupported_labels: return "unsupported-labels";
    case ErrorKind::oracle_scale_exceeded: return "oracle-scale-exceeded";
    case ErrorKind::usage: return "usage";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace fracopt
