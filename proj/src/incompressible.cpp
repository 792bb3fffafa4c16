#include "lowmach/incompressible.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lowmach/error.hpp"

namespace lowmach {

FaceField project_initial(const PoissonSolver& solver, const FaceField& u0, Vec2 obstacle_velocity) {
    const Grid& grid = solver.grid();
    FaceField u = u0;
    apply_wall_values(grid, u, obstacle_velocity);
    ScalarField rhs = divergence_full(grid, u);
    for (auto& v : rhs.data()) v = -v;
    const ScalarField phi = solver.solve(rhs);
    axpy(-1.0, gradient(grid, phi), u);
    return u;
}

double max_divergence(const Grid& grid, const FaceField& u) {
    const ScalarField d = divergence_full(grid, u);
    double m = 0.0;
    for (int k = 0; k < grid.active_count(); ++k) {
        const auto [i, j] = grid.active_cell(k);
        m = std::max(m, std::abs(d(i, j)));
    }
    return m;
}

ProjectionSolver::ProjectionSolver(IncompressibleModel model)
    : model_(std::move(model)), poisson_(std::make_shared<PoissonSolver>(NeumannLaplacian(model_.grid))) {
    model_.visc.validate();
    if (!(model_.reference_density > 0.0)) throw Error(ErrorCode::InvalidArgument, "reference density must be positive");
}

IncompressibleState ProjectionSolver::initial_state(const FaceField& u0) const {
    IncompressibleState s;
    s.velocity = project_initial(*poisson_, u0, model_.path.eval(0.0).velocity);
    s.pressure = ScalarField(model_.grid.nx(), model_.grid.ny());
    return s;
}

double ProjectionSolver::stable_time_step(const IncompressibleState& state, double cfl) const {
    const Grid& grid = model_.grid;
    double speed = 0.0;
    for (double v : state.velocity.xdata()) speed = std::max(speed, std::abs(v));
    for (double v : state.velocity.ydata()) speed = std::max(speed, std::abs(v));
    speed += model_.path.eval(std::min(state.time, model_.path.horizon())).velocity.norm();
    const double h = grid.h();
    double limit = 1e300;
    if (speed > 0.0) limit = h / speed;
    const double nu = (4.0 / 3.0 * model_.visc.shear + model_.visc.bulk) / model_.reference_density;
    if (nu > 0.0) limit = std::min(limit, h * h / (4.0 * nu));
    return cfl * limit;
}

void ProjectionSolver::advance(IncompressibleState& state, double dt, double cfl) const {
    const Grid& grid = model_.grid;
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "time step must be positive");
    const double limit = stable_time_step(state, cfl);
    if (cfl > 0.4 + 1e-12 || dt > limit * (1.0 + 1e-12)) {
        throw Error(ErrorCode::CflViolation, "dt=" + std::to_string(dt) + " exceeds " + std::to_string(limit));
    }
    const Vec2 frame = model_.path.eval(state.time).velocity;
    const Vec2 wall_next = model_.path.eval(state.time + dt).velocity;
    FaceField& u = state.velocity;
    const FaceField adv = advection(grid, u, frame);
    const FaceField visc = tensor_divergence(grid, stress_field(grid, model_.visc, velocity_gradient(grid, u)));
    const double inv_rho = 1.0 / model_.reference_density;
    const double w = model_.sponge_width;
    // Fixed relaxation rate: there is no sound speed, only the rim width.
    const double rate = w > 0.0 ? 4.0 / w : 0.0;
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 1; i < grid.nx(); ++i) {
            if (grid.xface_kind(i, j) != FaceKind::Open) continue;
            double v = u.x(i, j) + dt * (-adv.x(i, j) + visc.x(i, j) * inv_rho);
            if (w > 0.0) v *= std::exp(-rate * dt * sponge_profile(grid, grid.xface_center(i, j), w));
            u.x(i, j) = v;
        }
    }
    for (int j = 1; j < grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            if (grid.yface_kind(i, j) != FaceKind::Open) continue;
            double v = u.y(i, j) + dt * (-adv.y(i, j) + visc.y(i, j) * inv_rho);
            if (w > 0.0) v *= std::exp(-rate * dt * sponge_profile(grid, grid.yface_center(i, j), w));
            u.y(i, j) = v;
        }
    }
    apply_wall_values(grid, u, wall_next);
    ScalarField rhs = divergence_full(grid, u);
    for (auto& v : rhs.data()) v = -v;
    const ScalarField phi = poisson_->solve(rhs);
    axpy(-1.0, gradient(grid, phi), u);
    state.pressure = phi;
    for (auto& v : state.pressure.data()) v *= model_.reference_density / dt;
    state.time += dt;
}

long run_incompressible(const ProjectionSolver& solver, IncompressibleState state, const Schedule& schedule,
                        const DtPolicy& policy, const IncompressibleObserver& observer) {
    const std::vector<double> times = schedule.times();
    if (times.back() > solver.model().path.horizon() * (1.0 + 1e-12)) {
        throw Error(ErrorCode::OutOfHorizon, "schedule ends after the motion horizon");
    }
    long steps = 0;
    if (observer) observer(0, state);
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double target = times[k];
        while (state.time < target) {
            double dt = policy.fixed ? *policy.fixed : solver.stable_time_step(state, policy.cfl);
            bool last = false;
            if (state.time + dt >= target - 1e-12 * std::max(1.0, target)) {
                dt = target - state.time;
                last = true;
            }
            try {
                solver.advance(state, dt, policy.cfl);
            } catch (const Error& e) {
                throw Error(e.code(), "reference step " + std::to_string(steps) + ": " + e.detail());
            }
            if (last) state.time = target;
            ++steps;
        }
        if (observer) observer(static_cast<int>(k), state);
    }
    return steps;
}

}  // namespace lowmach
