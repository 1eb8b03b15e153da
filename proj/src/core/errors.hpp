#ifndef BETHE_ERRORS_HPP
#define BETHE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bethe {

// Failure classes surfaced through the C API as codes; inside the core they
// travel as exceptions.
enum class ErrCode {
  NonConvergence,
  SingularOnContour,
  NoRootFound,
  DegenerateConfig,
  CriticalPoint,
  FitUnstable,
  BranchTrackingFailure,
  AtPole,
  AtDivisor,
  BadModulus,
  BadPeriodMatrix,
  UnsupportedOrder,
  CycleEncodingInvalid,
  BranchClearance,
  ValidationFailed,
  SingularCharacteristic,
  WronskianZero,
  DegenerateImage,
  NotCanonical,
  PathThroughPole,
  PathThroughDivisor,
  InconsistentProfile,
  SBViolated,
  StepFailure,
  ClearanceViolated,
  QNotConstant,
  BadInput,
};

class Error : public std::runtime_error {
public:
  Error(ErrCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrCode code() const { return code_; }

private:
  ErrCode code_;
};

inline const char* err_name(ErrCode c) {
  switch (c) {
    case ErrCode::NonConvergence: return "NonConvergence";
    case ErrCode::SingularOnContour: return "SingularOnContour";
    case ErrCode::NoRootFound: return "NoRootFound";
    case ErrCode::DegenerateConfig: return "DegenerateConfig";
    case ErrCode::CriticalPoint: return "CriticalPoint";
    case ErrCode::FitUnstable: return "FitUnstable";
    case ErrCode::BranchTrackingFailure: return "BranchTrackingFailure";
    case ErrCode::AtPole: return "AtPole";
    case ErrCode::AtDivisor: return "AtDivisor";
    case ErrCode::BadModulus: return "BadModulus";
    case ErrCode::BadPeriodMatrix: return "BadPeriodMatrix";
    case ErrCode::UnsupportedOrder: return "UnsupportedOrder";
    case ErrCode::CycleEncodingInvalid: return "CycleEncodingInvalid";
    case ErrCode::BranchClearance: return "BranchClearance";
    case ErrCode::ValidationFailed: return "ValidationFailed";
    case ErrCode::SingularCharacteristic: return "SingularCharacteristic";
    case ErrCode::WronskianZero: return "WronskianZero";
    case ErrCode::DegenerateImage: return "DegenerateImage";
    case ErrCode::NotCanonical: return "NotCanonical";
    case ErrCode::PathThroughPole: return "PathThroughPole";
    case ErrCode::PathThroughDivisor: return "PathThroughDivisor";
    case ErrCode::InconsistentProfile: return "InconsistentProfile";
    case ErrCode::SBViolated: return "SBViolated";
    case ErrCode::StepFailure: return "StepFailure";
    case ErrCode::ClearanceViolated: return "ClearanceViolated";
    case ErrCode::QNotConstant: return "QNotConstant";
    case ErrCode::BadInput: return "BadInput";
  }
  return "Unknown";
}

[[noreturn]] inline void fail(ErrCode code, const std::string& msg) {
  throw Error(code, std::string(err_name(code)) + ": " + msg);
}

}  // namespace bethe

#endif
