/// @file acoustics.hpp
/// @brief Acoustic wave system in Neumann eigenmodes.
///
/// Per retained mode k with eigenvalue lambda > 0 the system
///   eps r' = lambda psi,   eps psi' = -c2 r + eps h,      c2 = p'(rho_bar)
/// is a rotation with frequency omega = sqrt(c2 lambda) / eps that conserves
/// c2 r^2 + lambda psi^2. The kernel mode keeps a constant r and a zero
/// potential (zero-mean gauge).
#pragma once

#include <array>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "lowmach/compressible.hpp"
#include "lowmach/spectral.hpp"

namespace lowmach {

struct AcousticState {
    ScalarField density_fluctuation;  ///< (rho - rho_bar) / eps
    ScalarField potential;            ///< zero-mean acoustic potential
    double eps = 1.0;
    double time = 0.0;
};

/// Mode coefficients of an acoustic state.
struct ModalState {
    Eigen::VectorXd density;
    Eigen::VectorXd potential;
    double time = 0.0;
};

ModalState to_modal(const SpectralDecomposition& spectrum, const AcousticState& state);
AcousticState from_modal(const SpectralDecomposition& spectrum, const ModalState& state, double eps);

double acoustic_energy(const SpectralDecomposition& spectrum, double sound_slope, const ModalState& state);

ModalState wave_propagate(const SpectralDecomposition& spectrum, const PressureLaw& law, double eps,
                          const ModalState& initial, double t);

struct PropagatedState {
    AcousticState state;
    double truncation_remainder = 0.0;  ///< dropped part of the initial data, both components
};

PropagatedState wave_propagate(const SpectralDecomposition& spectrum, const PressureLaw& law,
                               const AcousticState& initial, double t);

/// Forcing h sampled at increasing times, one coefficient vector per sample.
/// Between samples h is linear in time.
struct ForcingSeries {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> coefficients;
};

/// Variation of constants with exact integration of the piecewise-linear
/// forcing. Returns the state at every forcing sample time; the first sample
/// time must equal initial.time.
std::vector<ModalState> duhamel_solve(const SpectralDecomposition& spectrum, const PressureLaw& law, double eps,
                                      const ModalState& initial, const ForcingSeries& forcing);

/// Forcing terms of the wave system evaluated from one fluid state.
struct ForcingFields {
    TensorField viscous;                ///< S(grad u)
    TensorField convective_essential;   ///< -[rho]_ess u (x) u
    TensorField convective_residual;    ///< -[rho]_res u (x) u
    FaceField unsteady;                 ///< -rho_bar dV/dt in the moving frame
    ScalarField pressure_remainder;     ///< eps^-2 (p - p'(rho_bar)(rho - rho_bar) - p(rho_bar))
    TensorField translation_essential;  ///< ([rho]_ess u - rho_bar V) (x) m'
    TensorField translation_residual;   ///< [rho]_res u (x) m'
    TensorField boundary_transport;     ///< eps m' (x) W
    FaceField acceleration_essential;   ///< -eps m'' [r]_ess
    FaceField acceleration_residual;    ///< -eps m'' [r]_res
};

ForcingFields assemble_forcing(const FluidState& state, const Grid& grid, const PressureLaw& law,
                               const ViscosityPair& visc, const MotionPath& path, const ExtensionBasis& extension);

enum class ForcingTerm {
    Viscous,
    ConvectiveEssential,
    ConvectiveResidual,
    PressureRemainder,
    Unsteady,
    TranslationEssential,
    TranslationResidual,
    BoundaryTransport,
    AccelerationEssential,
    AccelerationResidual,
};

inline constexpr std::array<ForcingTerm, 10> kForcingTerms = {
    ForcingTerm::Viscous,          ForcingTerm::ConvectiveEssential, ForcingTerm::ConvectiveResidual,
    ForcingTerm::PressureRemainder, ForcingTerm::Unsteady,          ForcingTerm::TranslationEssential,
    ForcingTerm::TranslationResidual, ForcingTerm::BoundaryTransport, ForcingTerm::AccelerationEssential,
    ForcingTerm::AccelerationResidual,
};

std::string_view to_string(ForcingTerm term);

/// Powers s of the Neumann Laplacian a term may be paired with; channel i
/// carries the power -1 + (i - 1) / 2.
std::vector<double> allowed_powers(ForcingTerm term);

/// Channel index 1..5 of power s.
int channel_of_power(double s);

/// Mode coefficients <h_term, e_k> of one forcing term; the kernel mode is zero.
Eigen::VectorXd forcing_coefficients(const SpectralDecomposition& spectrum, const ForcingFields& fields,
                                     ForcingTerm term);

/// h = sum over terms of their coefficients.
Eigen::VectorXd total_forcing(const SpectralDecomposition& spectrum, const ForcingFields& fields);

/// Per-mode routing: modes with lambda >= 1 use the largest allowed power,
/// the others the smallest. Channel i collects coefficient / lambda^s.
struct ChannelSplit {
    std::array<Eigen::VectorXd, 5> channels;
    std::array<double, 5> norms{};
};

ChannelSplit route_to_channels(const SpectralDecomposition& spectrum,
                               const std::vector<std::pair<ForcingTerm, Eigen::VectorXd>>& terms);

ChannelSplit forcing_channels(const SpectralDecomposition& spectrum, const ForcingFields& fields);

/// Time series of channel norms with trapezoidal L^2-in-time totals.
class ChannelSeries {
public:
    void append(double t, const ChannelSplit& split);
    const std::vector<double>& times() const { return times_; }
    const std::vector<std::array<double, 5>>& norms() const { return norms_; }
    std::array<double, 5> time_norms() const;
    double total() const;

private:
    std::vector<double> times_;
    std::vector<std::array<double, 5>> norms_;
};

struct AcousticExtraction {
    AcousticState state;
    FaceField shifted_momentum;  ///< W = rho u - rho_bar V - eps m' r on open faces
    FaceField solenoidal;        ///< H(W)
    double reconstruction_error = 0.0;
};

AcousticExtraction extract_acoustic_potential(const FluidState& state, const PoissonSolver& solver,
                                              const PressureLaw& law, const MotionPath& path,
                                              const FaceField& extension);

/// C^2 bump: 0 below lower_start, 1 on [lower_full, upper_full], 0 above upper_end.
struct SpectralWindow {
    double lower_start = 0.0;
    double lower_full = 0.0;
    double upper_full = 0.0;
    double upper_end = 0.0;

    double operator()(double lambda) const;
    /// Equal to 1 on [lambda_5, lambda_{K/2}] (one-based), rising from lambda_5/2
    /// and falling to min(1.5 lambda_{K/2}, lambda_K).
    static SpectralWindow standard(const SpectralDecomposition& spectrum);
};

/// 1 for |y| <= inner, 0 for |y| >= outer, C^2 in between.
ScalarField radial_cutoff(const Grid& grid, double inner, double outer);

struct RageOptions {
    double quadrature_factor = 0.5;
    /// Fixed step; 0 selects the largest admissible step.
    double step = 0.0;
    long max_samples = 2000000;
};

struct RageResult {
    double value = 0.0;
    double horizon = 0.0;
    int modes = 0;
    double truncation_remainder = 0.0;
    long samples = 0;
    double step = 0.0;
};

/// Composite Simpson evaluation of the time integral of
/// ||chi G(A) exp(i sqrt(c2 A) t / eps) X||^2. Throws unresolved-oscillation
/// when the step exceeds eps * quadrature_factor / sqrt(c2 lambda_max).
RageResult rage_decay(const SpectralDecomposition& spectrum, const PressureLaw& law, double eps, const ScalarField& x,
                      const ScalarField& chi, const SpectralWindow& window, double horizon,
                      const RageOptions& options = {});

}  // namespace lowmach
