#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ovn {

enum class ErrorKind {
  MalformedCsv,
  NoLabels,
  EmptyLabelRow,
  EmptyClass,
  UnknownKind,
  DimensionMismatch,
  InvalidArgument,
  NonpositiveZ,
  HessianNotPD,
  SingularSystem,
  LengthMismatch,
  TooFewInstances,
  AllTuplesInfeasible,
  IoError,
  ParseError,
  UnsupportedVersion,
  InvariantViolation,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedCsv: return "MalformedCsv";
    case ErrorKind::NoLabels: return "NoLabels";
    case ErrorKind::EmptyLabelRow: return "EmptyLabelRow";
    case ErrorKind::EmptyClass: return "EmptyClass";
    case ErrorKind::UnknownKind: return "UnknownKind";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonpositiveZ: return "NonpositiveZ";
    case ErrorKind::HessianNotPD: return "HessianNotPD";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::TooFewInstances: return "TooFewInstances";
    case ErrorKind::AllTuplesInfeasible: return "AllTuplesInfeasible";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
/// what() is "<Kind>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind), detail_(detail) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

  /// True for failures of the optimizer rather than of the input data.
  bool is_solver_error() const noexcept {
    return kind_ == ErrorKind::HessianNotPD || kind_ == ErrorKind::SingularSystem ||
           kind_ == ErrorKind::AllTuplesInfeasible;
  }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace ovn
