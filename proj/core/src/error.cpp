#include "vocal/error.hpp"

namespace vocal {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Parse: return "parse_error";
    case ErrorCode::Validation: return "validation_error";
    case ErrorCode::EmptyBand: return "empty_band";
    case ErrorCode::UnknownBand: return "unknown_band";
    case ErrorCode::TooShort: return "too_short";
    case ErrorCode::NotNormalized: return "not_normalized";
    case ErrorCode::EmptyCandidateSet: return "empty_candidate_set";
    case ErrorCode::InvalidConfig: return "invalid_config";
    case ErrorCode::WrongPhase: return "wrong_phase";
    case ErrorCode::InsufficientPower: return "insufficient_power";
    case ErrorCode::OutOfRange: return "out_of_range";
    case ErrorCode::Range: return "range_error";
    case ErrorCode::Storage: return "storage_error";
    case ErrorCode::CorruptArchive: return "corrupt_archive";
    case ErrorCode::UnsupportedFormat: return "unsupported_format";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::Conflict: return "conflict";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

Error Error::with_context(std::string_view context) const {
  std::string msg(context);
  msg += ": ";
  msg += what();
  return Error(code_, msg);
}

}  // namespace vocal
