#include "coda/error.hpp"

namespace coda {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroComponent: return "ZeroComponent";
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::ClosureViolation: return "ClosureViolation";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyRow: return "EmptyRow";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::WrongMethod: return "WrongMethod";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::MissingCovariance: return "MissingCovariance";
    case ErrorCode::AllZeroExpected: return "AllZeroExpected";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::TypeParseError: return "TypeParseError";
    case ErrorCode::UnknownCategory: return "UnknownCategory";
    case ErrorCode::EmptySplit: return "EmptySplit";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace coda
