#include "cosymlab/error.hpp"

namespace cosymlab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kArityMismatch: return "arity_mismatch";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kDegreeOverflow: return "degree_overflow";
    case ErrorCode::kDegreeUnderflow: return "degree_underflow";
    case ErrorCode::kSingularForm: return "singular_form";
    case ErrorCode::kStepUnderflow: return "step_underflow";
    case ErrorCode::kNoCrossing: return "no_crossing";
    case ErrorCode::kTangency: return "tangency";
    case ErrorCode::kNotOnSection: return "not_on_section";
    case ErrorCode::kNoiseFloor: return "noise_floor";
    case ErrorCode::kGluingViolation: return "gluing_violation";
    case ErrorCode::kNotClosed: return "not_closed";
    case ErrorCode::kNotSymplectic: return "not_symplectic";
    case ErrorCode::kVerificationFailed: return "verification_failed";
    case ErrorCode::kPathDependence: return "path_dependence";
    case ErrorCode::kCapExhausted: return "cap_exhausted";
    case ErrorCode::kDegenerateInput: return "degenerate_input";
    case ErrorCode::kMissingPrimitive: return "missing_primitive";
    case ErrorCode::kOpenSurface: return "open_surface";
    case ErrorCode::kDataError: return "data_error";
    case ErrorCode::kMalformedProfile: return "malformed_profile";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
  }
  return "unknown";
}

}  // namespace cosymlab
