/// @file harness.hpp
/// @brief Scenario construction from a config, the eps sweep and run-directory
/// management.
///
/// A run directory holds:
///   INCOMPLETE            present until every file below is written
///   config.yaml           canonical config text
///   energy.csv            t, eps, lhs, rhs, flag, tolerance, dissipation
///   metrics.csv           run_id, eps, metric_name, q, window, t_or_sup, value
///   channels.csv          eps and the five channel norms in L^2 over time
///   rage.csv              eps, D, T, K, truncation_remainder
///   spectrum.csv          k, lambda, residual of the forcing grid
///   summary.csv           one row per eps
///   eps_<eps>/, reference/  snapshot files
///   manifest.json         file list with content hashes and tolerances
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lowmach/acoustics.hpp"
#include "lowmach/config.hpp"
#include "lowmach/diagnostics.hpp"

namespace lowmach {

MotionPath make_motion(const ExperimentConfig& config);
Grid make_grid(const ExperimentConfig& config);
Grid make_spectral_grid(const ExperimentConfig& config);
CompressibleModel make_model(const ExperimentConfig& config);
IncompressibleModel make_reference_model(const ExperimentConfig& config);

/// Cell field rho^(1)_0: Gaussian pulse of the configured amplitude and width.
ScalarField initial_perturbation(const ExperimentConfig& config, const Grid& grid);
/// Initial velocity u_0. The vortex_gradient kind is a vortex patch at (0, 3a)
/// plus the gradient of a Gaussian at (-3a, 0); wall faces are left to the solvers.
FaceField initial_velocity(const ExperimentConfig& config, const Grid& grid);
IllPreparedData make_initial_data(const ExperimentConfig& config, const Grid& grid, double eps);

/// Horizon of the local-decay study: the configured fraction of the
/// reflection-return time 2 (L - a) eps_min / sqrt(p'(rho_bar)).
double rage_horizon(const ExperimentConfig& config);

struct RageScenario {
    Grid grid;
    SpectralDecomposition spectrum;
    ScalarField source;
    ScalarField cutoff;
    SpectralWindow window;
    double horizon = 0.0;
};

RageScenario make_rage_scenario(const ExperimentConfig& config);

struct EpsSummary {
    double eps = 0.0;
    long steps = 0;
    double density_deviation = 0.0;  ///< sup ||rho - rho_bar|| / eps
    double velocity_error = 0.0;     ///< ||u - U|| over (0,T) x K
    double solenoidal_error = 0.0;
    double residual_measure = 0.0;
    double channel_total = 0.0;
    std::array<double, 5> channels{};
    double rage = 0.0;
    bool energy_ok = true;
    double worst_energy_margin = 0.0;  ///< max over snapshots of (lhs - rhs) / tolerance
    double max_reconstruction_error = 0.0;
    double max_assembly_residual = 0.0;
    MassLog mass;
};

struct SweepResult {
    std::string directory;
    std::string config_hash;
    std::vector<EpsSummary> rows;
    RageResult rage_template;  ///< horizon, modes and remainder shared by all eps
    double reference_max_divergence = 0.0;
    long reference_steps = 0;
};

struct SweepOptions {
    /// 0 reads LOWMACH_WORKERS (default 1).
    int workers = 0;
    std::function<void(const std::string&)> progress;
};

int worker_count_from_env();

/// Runs the full pipeline and writes the run directory. Solver errors are
/// rethrown tagged with eps.
SweepResult run_sweep(const ExperimentConfig& config, const std::string& directory, const SweepOptions& options = {});

struct CheckResult {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = true;
    std::string detail;
};

struct VerifyReport {
    std::string directory;
    std::vector<CheckResult> checks;
    bool pass() const;
    std::string to_json() const;
};

/// Re-evaluates stored artifacts. Throws incomplete-run for directories still
/// marked incomplete and missing-artifact naming the first absent file.
VerifyReport verify_run(const std::string& directory);

/// Eigenvalue table of the spectral grid as CSV text (k, lambda, residual).
std::string spectrum_table(const ExperimentConfig& config);

std::string format_eps(double eps);

}  // namespace lowmach
