#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fisher {

enum class ErrorCode {
  DimensionMismatch,
  NonPositiveValue,
  BudgetNotSimplex,
  ZeroPrice,
  NonPositiveUtility,
  ShapeMismatch,
  SupportViolation,
  DomainError,
  LengthMismatch,
  ZeroVector,
  NonPositiveEstimate,
  IndexOutOfRange,
  EmptyTrace,
  IoError,
  UsageError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-checkable error code. All library failures
/// are reported through this type.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace fisher
