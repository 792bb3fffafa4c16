// Chorin projection solver for the incompressible limit on the same staggered grid.
#pragma once

#include <functional>
#include <memory>

#include "lowmach/compressible.hpp"
#include "lowmach/spectral.hpp"

namespace lowmach {

struct IncompressibleState {
    FaceField velocity;
    ScalarField pressure;
    double time = 0.0;
};

struct IncompressibleModel {
    Grid grid;
    ViscosityPair visc;
    MotionPath path;
    double reference_density = 1.0;
    double sponge_width = 0.0;
};

/// Projects u0 onto fields with zero full divergence whose wall faces carry the
/// obstacle velocity. For a resting obstacle this is the Helmholtz projection H(u0).
FaceField project_initial(const PoissonSolver& solver, const FaceField& u0, Vec2 obstacle_velocity = {});

class ProjectionSolver {
public:
    explicit ProjectionSolver(IncompressibleModel model);

    const IncompressibleModel& model() const { return model_; }
    const PoissonSolver& poisson() const { return *poisson_; }

    IncompressibleState initial_state(const FaceField& u0) const;
    double stable_time_step(const IncompressibleState& state, double cfl) const;
    /// Throws cfl-violation or poisson-failure.
    void advance(IncompressibleState& state, double dt, double cfl = 0.4) const;
    IncompressibleState step(const IncompressibleState& state, double dt, double cfl = 0.4) const {
        IncompressibleState next = state;
        advance(next, dt, cfl);
        return next;
    }

private:
    IncompressibleModel model_;
    std::shared_ptr<const PoissonSolver> poisson_;
};

/// Largest |full divergence| over active cells.
double max_divergence(const Grid& grid, const FaceField& u);

using IncompressibleObserver = std::function<void(int index, const IncompressibleState& state)>;

/// Returns the number of steps taken.
long run_incompressible(const ProjectionSolver& solver, IncompressibleState state, const Schedule& schedule,
                        const DtPolicy& policy, const IncompressibleObserver& observer = {});

}  // namespace lowmach
