#pragma once

#include <stdexcept>
#include <string>

namespace transq {

enum class ErrorCode {
  NonFiniteInput,
  DimensionMismatch,
  InvalidAction,
  EmptyTarget,
  DomainError,
  InsufficientData,
  InvalidPhase,
  MissingOracle,
  InvalidConfig,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so
// callers (and tests) can branch on the kind rather than the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace transq
