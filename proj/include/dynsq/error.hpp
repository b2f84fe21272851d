#pragma once

#include <stdexcept>
#include <string>

namespace dynsq {

enum class ErrorCode {
  InvalidArgument,
  NotAProbability,
  NegativeMass,
  InvalidLaw,
  ConfigInvalid,
  LoadOutOfRange,
  DomainError,
  StepTooLarge,
  CapTooSmall,
  EmptyLog,
  MismatchedGrids,
  NoFiniteSupport,
  IoError,
};

const char* error_code_name(ErrorCode code);

/// Library error carrying a stable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace dynsq
