#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cosymlab {

enum class ErrorCode {
  kArityMismatch,
  kDimensionMismatch,
  kDegreeOverflow,
  kDegreeUnderflow,
  kSingularForm,
  kStepUnderflow,
  kNoCrossing,
  kTangency,
  kNotOnSection,
  kNoiseFloor,
  kGluingViolation,
  kNotClosed,
  kNotSymplectic,
  kVerificationFailed,
  kPathDependence,
  kCapExhausted,
  kDegenerateInput,
  kMissingPrimitive,
  kOpenSurface,
  kDataError,
  kMalformedProfile,
  kInvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; `code()` identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cosymlab
