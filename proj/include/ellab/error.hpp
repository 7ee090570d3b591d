#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ellab {

enum class ErrorCode {
    InvalidArgument,
    NonFiniteValue,
    ShapeMismatch,
    SlabOutOfRange,
    BranchAmbiguity,
    NewtonDiverged,
    SingularJacobian,
    DegenerateData,
    MissingPotential,
    AsymmetricA,
    EigenFailure,
    NotHyperbolic,
    FixedPointDiverged,
    EmptyCloud,
    NonPositiveData,
    AverageNotConverged,
    NonHyperbolicLimit,
    ParseError,
    ValidationError,
    FormatError,
    IoError,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::SlabOutOfRange: return "SlabOutOfRange";
    case ErrorCode::BranchAmbiguity: return "BranchAmbiguity";
    case ErrorCode::NewtonDiverged: return "NewtonDiverged";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::MissingPotential: return "MissingPotential";
    case ErrorCode::AsymmetricA: return "AsymmetricA";
    case ErrorCode::EigenFailure: return "EigenFailure";
    case ErrorCode::NotHyperbolic: return "NotHyperbolic";
    case ErrorCode::FixedPointDiverged: return "FixedPointDiverged";
    case ErrorCode::EmptyCloud: return "EmptyCloud";
    case ErrorCode::NonPositiveData: return "NonPositiveData";
    case ErrorCode::AverageNotConverged: return "AverageNotConverged";
    case ErrorCode::NonHyperbolicLimit: return "NonHyperbolicLimit";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the report runner) can turn it into a verdict.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
    if (!cond) {
        fail(code, what);
    }
}

} // namespace ellab
