#include "ptqkr/errors.hpp"

namespace ptqkr {

const char* to_string(ErrKind k) {
    switch (k) {
    case ErrKind::OverflowRisk: return "OverflowRisk";
    case ErrKind::NonConvergedTail: return "NonConvergedTail";
    case ErrKind::NotApplicable: return "NotApplicable";
    case ErrKind::WindowTooSmall: return "WindowTooSmall";
    case ErrKind::ZeroEigenvalue: return "ZeroEigenvalue";
    case ErrKind::PreconditionViolation: return "PreconditionViolation";
    case ErrKind::ParamMismatch: return "ParamMismatch";
    case ErrKind::TooFewPoints: return "TooFewPoints";
    case ErrKind::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrKind::EmptyInput: return "EmptyInput";
    case ErrKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrKind::UnknownKind: return "UnknownKind";
    case ErrKind::MidpointNotCrossed: return "MidpointNotCrossed";
    case ErrKind::CacheCorrupt: return "CacheCorrupt";
    }
    return "Error";
}

bool is_validation_error(ErrKind k) {
    switch (k) {
    case ErrKind::OverflowRisk:
    case ErrKind::NotApplicable:
    case ErrKind::WindowTooSmall:
    case ErrKind::PreconditionViolation:
    case ErrKind::ParamMismatch:
    case ErrKind::TooFewPoints:
    case ErrKind::EmptyInput:
    case ErrKind::UnknownKind:
        return true;
    case ErrKind::NonConvergedTail:
    case ErrKind::ZeroEigenvalue:
    case ErrKind::DegenerateSpectrum:
    case ErrKind::ConvergenceFailure:
    case ErrKind::MidpointNotCrossed:
    case ErrKind::CacheCorrupt:
        return false;
    }
    return false;
}

} // namespace ptqkr
