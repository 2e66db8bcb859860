#pragma once

#include <stdexcept>
#include <string>

namespace wdlab {

enum class ErrorCode {
    DimensionMismatch,
    InvalidArgument,
    InvalidBody,
    DegenerateChord,
    NotInterior,
    NotOnBoundary,
    PointOutsideDomain,
    NonpositiveCoordinate,
    ParameterOutOfRange,
    Unsupported,
    InvalidMap,
    IncompatibleMapSpace,
    ImageEscapedDomain,
    UndecidedWithinBudget,
    MixedVerdicts,
    DisagreeingLimits,
    SequenceUnbounded,
    NoSamplesFound,
    PreconditionNotMet,
    OrbitNotEscaping,
    ConfigInvalid,
    IoError,
};

inline const char* to_string(ErrorCode c) {
    switch (c) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidBody: return "InvalidBody";
    case ErrorCode::DegenerateChord: return "DegenerateChord";
    case ErrorCode::NotInterior: return "NotInterior";
    case ErrorCode::NotOnBoundary: return "NotOnBoundary";
    case ErrorCode::PointOutsideDomain: return "PointOutsideDomain";
    case ErrorCode::NonpositiveCoordinate: return "NonpositiveCoordinate";
    case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::InvalidMap: return "InvalidMap";
    case ErrorCode::IncompatibleMapSpace: return "IncompatibleMapSpace";
    case ErrorCode::ImageEscapedDomain: return "ImageEscapedDomain";
    case ErrorCode::UndecidedWithinBudget: return "UndecidedWithinBudget";
    case ErrorCode::MixedVerdicts: return "MixedVerdicts";
    case ErrorCode::DisagreeingLimits: return "DisagreeingLimits";
    case ErrorCode::SequenceUnbounded: return "SequenceUnbounded";
    case ErrorCode::NoSamplesFound: return "NoSamplesFound";
    case ErrorCode::PreconditionNotMet: return "PreconditionNotMet";
    case ErrorCode::OrbitNotEscaping: return "OrbitNotEscaping";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace wdlab
