#include "lowmach/error.hpp"

namespace lowmach {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid-argument";
        case ErrorCode::UnsupportedDimension: return "unsupported-dimension";
        case ErrorCode::GeometryTooCoarse: return "geometry-too-coarse";
        case ErrorCode::OutOfHorizon: return "out-of-horizon";
        case ErrorCode::SolverDivergence: return "solver-divergence";
        case ErrorCode::NegativeDensity: return "negative-density";
        case ErrorCode::Vacuum: return "vacuum";
        case ErrorCode::CflViolation: return "cfl-violation";
        case ErrorCode::NanDetected: return "nan-detected";
        case ErrorCode::PoissonFailure: return "poisson-failure";
        case ErrorCode::DisconnectedDomain: return "disconnected-domain";
        case ErrorCode::EigensolverFailure: return "eigensolver-failure";
        case ErrorCode::KernelSingularity: return "kernel-singularity";
        case ErrorCode::UnresolvedOscillation: return "unresolved-oscillation";
        case ErrorCode::ScheduleMismatch: return "schedule-mismatch";
        case ErrorCode::MissingArtifact: return "missing-artifact";
        case ErrorCode::IncompleteRun: return "incomplete-run";
        case ErrorCode::ParseError: return "parse-error";
        case ErrorCode::ValidationError: return "validation-error";
    }
    return "unknown";
}

}  // namespace lowmach
