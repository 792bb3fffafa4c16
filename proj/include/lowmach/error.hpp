/// @file error.hpp
/// @brief Error codes and the exception type thrown across the library.
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lowmach {

enum class ErrorCode {
    InvalidArgument,
    UnsupportedDimension,
    GeometryTooCoarse,
    OutOfHorizon,
    SolverDivergence,
    NegativeDensity,
    Vacuum,
    CflViolation,
    NanDetected,
    PoissonFailure,
    DisconnectedDomain,
    EigensolverFailure,
    KernelSingularity,
    UnresolvedOscillation,
    ScheduleMismatch,
    MissingArtifact,
    IncompleteRun,
    ParseError,
    ValidationError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

    ErrorCode code() const noexcept { return code_; }
    /// Message without the code prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

}  // namespace lowmach
