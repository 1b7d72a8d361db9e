#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coda {

enum class ErrorCode {
  ZeroComponent,
  AllZero,
  ClosureViolation,
  DimensionMismatch,
  EmptyRow,
  UnknownLabel,
  IndexOutOfRange,
  RankDeficient,
  WrongMethod,
  DomainError,
  MissingCovariance,
  AllZeroExpected,
  MissingColumn,
  TypeParseError,
  UnknownCategory,
  EmptySplit,
  InvalidArgument,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable error kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace coda
