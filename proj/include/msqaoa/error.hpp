#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace msqaoa {

enum class ErrorCode {
  DegreeZero,
  DegreeTooLarge,
  NegativeSigma,
  AllZero,
  TooFewSpins,
  LengthMismatch,
  NonBinaryEntry,
  QOutOfRange,
  RangeError,
  Overflow,
  BudgetExceeded,
  TooLarge,
  ImaginaryResidue,
  NegativeVariance,
  NonPositiveM,
  EmptyGrid,
  SignError,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Cap-style errors (budget or memory limits) as opposed to validation errors.
constexpr bool is_cap_error(ErrorCode code) noexcept {
  return code == ErrorCode::BudgetExceeded || code == ErrorCode::TooLarge;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace msqaoa
