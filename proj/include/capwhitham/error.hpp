#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace capwhitham {

enum class ErrorCode {
  NonPositiveInput,
  WrongRegime,
  NoRoot,
  SizeMismatch,
  NonFiniteSymbol,
  BoundaryNotDecayed,
  WeightOverflow,
  SolverDivergence,
  NewtonDivergence,
  AliasingTail,
  OffGridFrequency,
  GridTooCoarse,
  KernelResidue,
  NoContraction,
  MaxIterations,
  SymbolNotCoercive,
  ResonantDenominator,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveInput: return "NonPositiveInput";
    case ErrorCode::WrongRegime: return "WrongRegime";
    case ErrorCode::NoRoot: return "NoRoot";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::NonFiniteSymbol: return "NonFiniteSymbol";
    case ErrorCode::BoundaryNotDecayed: return "BoundaryNotDecayed";
    case ErrorCode::WeightOverflow: return "WeightOverflow";
    case ErrorCode::SolverDivergence: return "SolverDivergence";
    case ErrorCode::NewtonDivergence: return "NewtonDivergence";
    case ErrorCode::AliasingTail: return "AliasingTail";
    case ErrorCode::OffGridFrequency: return "OffGridFrequency";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::KernelResidue: return "KernelResidue";
    case ErrorCode::NoContraction: return "NoContraction";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::SymbolNotCoercive: return "SymbolNotCoercive";
    case ErrorCode::ResonantDenominator: return "ResonantDenominator";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a code so front ends can map
/// it to an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// Configuration-type failures as opposed to numerical ones.
  bool is_usage_error() const noexcept {
    return code_ == ErrorCode::NonPositiveInput || code_ == ErrorCode::WrongRegime ||
           code_ == ErrorCode::InvalidArgument || code_ == ErrorCode::SizeMismatch;
  }

 private:
  ErrorCode code_;
};

/// Compact numeric formatting for messages.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace capwhitham
