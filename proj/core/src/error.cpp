#include "transq/error.hpp"

namespace transq {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidAction: return "InvalidAction";
    case ErrorCode::EmptyTarget: return "EmptyTarget";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::InvalidPhase: return "InvalidPhase";
    case ErrorCode::MissingOracle: return "MissingOracle";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace transq
