#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vocal {

enum class ErrorCode {
  Parse,
  Validation,
  EmptyBand,
  UnknownBand,
  TooShort,
  NotNormalized,
  EmptyCandidateSet,
  InvalidConfig,
  WrongPhase,
  InsufficientPower,
  OutOfRange,
  Range,
  Storage,
  CorruptArchive,
  UnsupportedFormat,
  NotFound,
  Conflict,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

  /// Copy of this error with "<context>: " prepended to the message.
  Error with_context(std::string_view context) const;

 private:
  ErrorCode code_;
};

}  // namespace vocal
