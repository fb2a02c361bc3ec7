#include "flowcorr/error.hpp"

namespace flowcorr {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyFlow: return "EmptyFlow";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::NonPositiveData: return "NonPositiveData";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::SupportMismatch: return "SupportMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidSupport: return "InvalidSupport";
    case ErrorCode::UnsupportedJitterFamily: return "UnsupportedJitterFamily";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::NegativeDelay: return "NegativeDelay";
    case ErrorCode::DegenerateScores: return "DegenerateScores";
    case ErrorCode::UnmeasurableTarget: return "UnmeasurableTarget";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MonotonicityError: return "MonotonicityError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

static std::string with_line(const std::string& message,
                             std::optional<std::size_t> line) {
  if (!line) return message;
  return "line " + std::to_string(*line) + ": " + message;
}

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> line)
    : std::runtime_error(with_line(message, line)), code_(code), line_(line) {}

}  // namespace flowcorr
