#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kgmm {

enum class ErrorKind {
  InvalidArgument,  // malformed or out-of-domain input
  DimensionMismatch,
  NonFinite,
  NotPositiveSemidefinite,
  Singular,
  NoConvergence,
  Infeasible,
  Io,
};

/// Machine-readable tag for an ErrorKind, e.g. "dimension_mismatch".
std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type thrown by the library. The kind survives up to the
/// CLI, which prints it as the first token of its one-line error report.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace kgmm
