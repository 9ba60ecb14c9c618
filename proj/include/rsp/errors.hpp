#pragma once

#include <stdexcept>
#include <string>

namespace rsp {

enum class ErrorCode {
    // network
    NegativeEntry,
    ColumnNotStochastic,
    Reducible,
    NotDiagonalizable,
    EigensolverFailure,
    AlphaOutOfRange,
    // schedules
    ExponentOutOfRange,
    DeltaOutOfRange,
    // simulator
    ComponentOutOfRange,
    ProbabilityOutOfUnit,
    DimensionMismatch,
    // asymptotics
    DenominatorNearZero,
    // inference
    MalformedRow,
    NonBinaryEntry,
    GapInSteps,
    DegenerateVariance,
    SingularWhitening,
    // verify
    HorizonOrdering,
    // plumbing
    ConfigError,
    IoError,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::NegativeEntry: return "NegativeEntry";
        case ErrorCode::ColumnNotStochastic: return "ColumnNotStochastic";
        case ErrorCode::Reducible: return "Reducible";
        case ErrorCode::NotDiagonalizable: return "NotDiagonalizable";
        case ErrorCode::EigensolverFailure: return "EigensolverFailure";
        case ErrorCode::AlphaOutOfRange: return "AlphaOutOfRange";
        case ErrorCode::ExponentOutOfRange: return "ExponentOutOfRange";
        case ErrorCode::DeltaOutOfRange: return "DeltaOutOfRange";
        case ErrorCode::ComponentOutOfRange: return "ComponentOutOfRange";
        case ErrorCode::ProbabilityOutOfUnit: return "ProbabilityOutOfUnit";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::DenominatorNearZero: return "DenominatorNearZero";
        case ErrorCode::MalformedRow: return "MalformedRow";
        case ErrorCode::NonBinaryEntry: return "NonBinaryEntry";
        case ErrorCode::GapInSteps: return "GapInSteps";
        case ErrorCode::DegenerateVariance: return "DegenerateVariance";
        case ErrorCode::SingularWhitening: return "SingularWhitening";
        case ErrorCode::HorizonOrdering: return "HorizonOrdering";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Structured rejection: every throw names the first failed invariant.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + detail),
          code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

} // namespace rsp
