#pragma once

#include <stdexcept>
#include <string>

namespace songlab {

enum class ErrorCode {
  InvalidArgument,
  DuplicateIdentity,
  NoTranscript,
  Unsupported,
  EpsilonOutOfRange,
  ConfigError,
  IoError,
  FormatError,
};

const char* to_string(ErrorCode code) noexcept;

/// Thrown for precondition violations and attack refusals. Protocol-level
/// rejections (stale stamps, MAC mismatches) are not errors; they come back
/// as a Status from the verify functions.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace songlab
