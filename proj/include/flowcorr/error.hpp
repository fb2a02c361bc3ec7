#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace flowcorr {

enum class ErrorCode {
  InvalidArgument,
  EmptyFlow,
  DegenerateData,
  NonPositiveData,
  ConvergenceFailure,
  SupportMismatch,
  LengthMismatch,
  InvalidSupport,
  UnsupportedJitterFamily,
  EmptyGrid,
  NegativeDelay,
  DegenerateScores,
  UnmeasurableTarget,
  ParseError,
  MonotonicityError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the toolkit. Callers dispatch on code().
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  /// 1-based line number for file-format errors.
  std::optional<std::size_t> line() const noexcept { return line_; }

private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace flowcorr
