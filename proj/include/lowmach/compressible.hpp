/// @file compressible.hpp
/// @brief Explicit staggered finite-volume solver for the scaled barotropic
/// Navier-Stokes system, written in the obstacle frame.
///
/// One step is a symplectic-Euler splitting:
///   1. density: conservative update with a Rusanov flux of rho * (u - m'),
///      wave speed |u - m'| + c / eps;
///   2. velocity: upwind transport by u - m', pressure gradient of the new
///      density scaled by 1 / eps^2, and the divergence of the viscous stress;
///   3. sponge relaxation toward (rho_bar, 0) in the outer rim, exact over dt
///      at rate 4 c / (eps w) times a cubic ramp;
///   4. wall faces reset to the obstacle velocity at the new time.
#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "lowmach/constitutive.hpp"
#include "lowmach/discretization.hpp"
#include "lowmach/fields.hpp"
#include "lowmach/geometry.hpp"

namespace lowmach {

struct FluidState {
    ScalarField density;
    FaceField velocity;
    double time = 0.0;
    double eps = 1.0;
};

/// rho_0 = rho_bar + eps * density_perturbation, u_0 = velocity.
struct IllPreparedData {
    ScalarField density_perturbation;
    FaceField velocity;
    double eps = 1.0;
    /// Bound on the L^2 and L^inf norms of the perturbation.
    double bound = 1e300;
};

struct CompressibleModel {
    Grid grid;
    PressureLaw law;
    ViscosityPair visc;
    MotionPath path;
    double sponge_width = 0.0;
};

/// Throws invalid-argument if the perturbation exceeds its bound, vacuum if
/// the initial density is not positive.
FluidState init_state(const CompressibleModel& model, const IllPreparedData& data);

/// Largest admissible step: cfl * min(acoustic, advective, viscous limits).
double stable_time_step(const CompressibleModel& model, const FluidState& state, double cfl);

struct StepLog {
    double sponge_mass_change = 0.0;
    double boundary_mass_change = 0.0;
};

/// Advances in place. Throws cfl-violation, vacuum or nan-detected.
void advance(FluidState& state, const CompressibleModel& model, double dt, double cfl = 0.4, StepLog* log = nullptr);

inline FluidState step(const FluidState& state, const CompressibleModel& model, double dt, double cfl = 0.4,
                       StepLog* log = nullptr) {
    FluidState next = state;
    advance(next, model, dt, cfl, log);
    return next;
}

double total_mass(const Grid& grid, const ScalarField& rho);
double kinetic_energy(const Grid& grid, const ScalarField& rho, const FaceField& u);
/// eps^-2 * sum of relative entropy.
double internal_energy(const Grid& grid, const PressureLaw& law, const ScalarField& rho, double eps);

/// Snapshot times k * T / (n - 1), k = 0..n-1 (a single time when T = 0).
struct Schedule {
    double horizon = 0.0;
    int snapshots = 51;

    std::vector<double> times() const;
};

struct DtPolicy {
    double cfl = 0.4;
    std::optional<double> fixed;
};

struct EnergyRecord {
    double time = 0.0;
    double eps = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double tolerance = 0.0;
    bool flag = true;
};

/// Time integrals entering the energy balance, accumulated at the left end of
/// each step.
struct EnergyAccumulators {
    double initial_energy = 0.0;
    double initial_coupling = 0.0;  ///< integral of rho_0 u_0 . V(0)
    double dissipation = 0.0;       ///< integral over time of S(grad u) : grad u
    double coupling = 0.0;          ///< integral of S:grad V - rho u(x)u:grad V - rho u . dV/dt
    double extension_scale = 0.0;   ///< max over time of rho_bar/2 ||V||^2
};

/// V(t) = m'_x(t) B_x + m'_y(t) B_y built once from two unit-velocity liftings.
class ExtensionBasis {
public:
    ExtensionBasis() = default;
    ExtensionBasis(const Grid& grid, double support_radius);

    bool empty() const { return !available_; }
    FaceField value(Vec2 velocity) const;
    /// Moving-frame time derivative dV/dt - m' . grad V.
    FaceField material_rate(Vec2 velocity, Vec2 acceleration) const;
    const GradientField& gradient_x() const { return grad_x_; }
    const GradientField& gradient_y() const { return grad_y_; }

private:
    bool available_ = false;
    FaceField bx_, by_;
    FaceField dbx_dx_, dbx_dy_, dby_dx_, dby_dy_;
    GradientField grad_x_, grad_y_;
};

EnergyRecord energy_report(const FluidState& state, const CompressibleModel& model, const FaceField& extension,
                           const EnergyAccumulators& acc, double tolerance_rel);

class EnergyMonitor {
public:
    /// support_radius <= 0 selects the default extension radius.
    EnergyMonitor(const CompressibleModel& model, double support_radius, double tolerance_rel);

    void start(const FluidState& initial);
    void accumulate(const FluidState& state, double dt);
    EnergyRecord record(const FluidState& state);
    const EnergyAccumulators& accumulators() const { return acc_; }
    const ExtensionBasis& basis() const { return basis_; }

private:
    const CompressibleModel* model_;
    double tolerance_rel_;
    ExtensionBasis basis_;
    EnergyAccumulators acc_;
};

struct RunOptions {
    DtPolicy dt;
    double extension_radius = 0.0;
    double energy_tolerance = 1e-3;
};

struct MassLog {
    double initial = 0.0;
    double sponge = 0.0;
    double boundary = 0.0;
    double final = 0.0;
};

struct RunSummary {
    std::vector<EnergyRecord> energy;
    MassLog mass;
    long steps = 0;
};

using SnapshotObserver = std::function<void(int index, const FluidState& state, const EnergyRecord& energy)>;

/// Integrates to every schedule time exactly, calling the observer at each
/// snapshot. Solver errors are rethrown tagged with the step index.
RunSummary run(const CompressibleModel& model, FluidState initial, const Schedule& schedule, const RunOptions& options,
               const SnapshotObserver& observer = {});

struct Trajectory {
    std::vector<FluidState> snapshots;
    RunSummary summary;
};

Trajectory run_trajectory(const CompressibleModel& model, FluidState initial, const Schedule& schedule,
                          const RunOptions& options);

}  // namespace lowmach
