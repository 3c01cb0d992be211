#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace myopic {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kRowNotStochastic,
  kUnknownClass,
  kSymbolUnknown,
  kInvalidScope,
  kClassOutOfScope,
  kTrueClassInScope,
  kNoRejector,
  kTheoryUnavailable,
  kScopeMismatch,
  kEmptyNeighborhood,
  kReplayExhausted,
  kRetriesExhausted,
  kDisconnectedGraph,
  kParseError,
  kAsymmetricInput,
  kIdentifiabilityViolated,
  kInsufficientSamples,
  kIoError,
  kConfigError,
};

std::string_view to_string(ErrorCode code);

// Every failure surfaced by the library is an Error carrying a stable code,
// so callers (the CLI in particular) can map failures to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace myopic
