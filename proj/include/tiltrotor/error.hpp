#pragma once

#include <stdexcept>
#include <string>

namespace tiltrotor {

enum class ErrorCode {
  kInvalidInput,
  kRepresentationSingular,
  kNoRoot,
  kDegenerate,
  kContinuationBreak,
  kAbortedSingular,
};

const char* to_string(ErrorCode code);

/// Exception carrying one of the toolkit's error codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "INVALID_INPUT";
    case ErrorCode::kRepresentationSingular: return "REPRESENTATION_SINGULAR";
    case ErrorCode::kNoRoot: return "NO_ROOT";
    case ErrorCode::kDegenerate: return "DEGENERATE";
    case ErrorCode::kContinuationBreak: return "CONTINUATION_BREAK";
    case ErrorCode::kAbortedSingular: return "ABORTED_SINGULAR";
  }
  return "UNKNOWN";
}

}  // namespace tiltrotor
