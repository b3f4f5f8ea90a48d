#pragma once

#include <stdexcept>
#include <string>

namespace ptqkr {

// Failure taxonomy shared by all modules. The CLI maps these onto exit
// codes: configuration/validation problems -> 2, numerical failures -> 3.
enum class ErrKind {
    OverflowRisk,
    NonConvergedTail,
    NotApplicable,
    WindowTooSmall,
    ZeroEigenvalue,
    PreconditionViolation,
    ParamMismatch,
    TooFewPoints,
    DegenerateSpectrum,
    EmptyInput,
    ConvergenceFailure,
    UnknownKind,
    MidpointNotCrossed,
    CacheCorrupt,
};

const char* to_string(ErrKind k);

// True for error kinds caused by bad inputs or configuration (CLI exit 2);
// false for failures arising inside a computation (CLI exit 3).
bool is_validation_error(ErrKind k);

class Error : public std::runtime_error {
  public:
    Error(ErrKind kind, const std::string& msg)
        : std::runtime_error(std::string(to_string(kind)) + ": " + msg), kind_(kind) {}

    ErrKind kind() const { return kind_; }

  private:
    ErrKind kind_;
};

[[noreturn]] inline void raise(ErrKind kind, const std::string& msg) {
    throw Error(kind, msg);
}

} // namespace ptqkr
