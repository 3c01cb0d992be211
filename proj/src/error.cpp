#include "myopic/error.hpp"

namespace myopic {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kRowNotStochastic: return "RowNotStochastic";
    case ErrorCode::kUnknownClass: return "UnknownClass";
    case ErrorCode::kSymbolUnknown: return "SymbolUnknown";
    case ErrorCode::kInvalidScope: return "InvalidScope";
    case ErrorCode::kClassOutOfScope: return "ClassOutOfScope";
    case ErrorCode::kTrueClassInScope: return "TrueClassInScope";
    case ErrorCode::kNoRejector: return "NoRejector";
    case ErrorCode::kTheoryUnavailable: return "TheoryUnavailable";
    case ErrorCode::kScopeMismatch: return "ScopeMismatch";
    case ErrorCode::kEmptyNeighborhood: return "EmptyNeighborhood";
    case ErrorCode::kReplayExhausted: return "ReplayExhausted";
    case ErrorCode::kRetriesExhausted: return "RetriesExhausted";
    case ErrorCode::kDisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kAsymmetricInput: return "AsymmetricInput";
    case ErrorCode::kIdentifiabilityViolated: return "IdentifiabilityViolated";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace myopic
