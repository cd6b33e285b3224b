#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fracopt {

enum class ErrorKind {
  invalid_grid,
  incompatible_fields,
  invalid_label,
  self_pair,
  degenerate_truncation,
  domain,
  step_too_large,
  solver_failure,
  invalid_target,
  unsupported_labels,
  oracle_scale_exceeded,
  usage,
  io,
};

std::string_view to_string(ErrorKind kind);

/// Exception thrown for every contract violation in the library. The kind
/// lets callers (and the CLI exit-code mapping) distinguish failure classes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fracopt
