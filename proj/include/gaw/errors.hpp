#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gaw {

enum class ErrorKind {
  NotPositiveDefinite,
  DimensionMismatch,
  IndexOutOfRange,
  NumericalFailure,
  ContractionViolation,
  MarginalMismatch,
  NotMonge,
  SingularEntropy,
  BudgetExceeded,
  SinkhornDiverged,
  UnsupportedDimension,
  InvalidInput,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::ContractionViolation: return "ContractionViolation";
    case ErrorKind::MarginalMismatch: return "MarginalMismatch";
    case ErrorKind::NotMonge: return "NotMonge";
    case ErrorKind::SingularEntropy: return "SingularEntropy";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::SinkhornDiverged: return "SinkhornDiverged";
    case ErrorKind::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorKind::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

/// Library exception; `kind()` lets callers map failures to exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace gaw
