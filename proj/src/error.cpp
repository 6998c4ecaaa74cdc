#include "fisher/error.hpp"

namespace fisher {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonPositiveValue: return "NonPositiveValue";
    case ErrorCode::BudgetNotSimplex: return "BudgetNotSimplex";
    case ErrorCode::ZeroPrice: return "ZeroPrice";
    case ErrorCode::NonPositiveUtility: return "NonPositiveUtility";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::SupportViolation: return "SupportViolation";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::NonPositiveEstimate: return "NonPositiveEstimate";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UsageError: return "UsageError";
  }
  return "UnknownError";
}

}  // namespace fisher
