// SPDX-License-Identifier: Apache-2.0
#ifndef TIMEBIN_CORE_ERRORS_HPP
#define TIMEBIN_CORE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace timebin {

enum class ErrorCode {
  InvalidArgument,
  ZeroVector,
  DimensionMismatch,
  IndexOutOfRange,
  NonUniformGrid,
  FringeFlat,
  MissingPair,
  PopulationMismatch,
  VerificationFailed,
  StepTooLarge,
  OverlapVanished,
  AmplitudeVanished,
  UnsupportedSpinCount,
  ParseError,
  Internal,
};

const char* error_code_name(ErrorCode code);

/// All library failures are reported through this exception; `code()`
/// selects the branch at the C boundary and in tests.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace timebin

#endif
