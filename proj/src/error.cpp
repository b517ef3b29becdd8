#include "kgmm/error.hpp"

namespace kgmm {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::DimensionMismatch: return "dimension_mismatch";
    case ErrorKind::NonFinite: return "non_finite";
    case ErrorKind::NotPositiveSemidefinite: return "not_psd";
    case ErrorKind::Singular: return "singular";
    case ErrorKind::NoConvergence: return "no_convergence";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace kgmm
