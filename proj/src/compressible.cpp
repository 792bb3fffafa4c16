#include "lowmach/compressible.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lowmach/error.hpp"

namespace lowmach {

namespace {

constexpr double kSpongeStrength = 4.0;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

double max_face_speed(const Grid& grid, const FaceField& u) {
    double m = 0.0;
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i <= grid.nx(); ++i) {
            if (grid.xface_kind(i, j) != FaceKind::Dead) m = std::max(m, std::abs(u.x(i, j)));
        }
    }
    for (int j = 0; j <= grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            if (grid.yface_kind(i, j) != FaceKind::Dead) m = std::max(m, std::abs(u.y(i, j)));
        }
    }
    return m;
}

void check_finite_velocity(const Grid& grid, const FaceField& u) {
    for (double v : u.xdata()) {
        if (!std::isfinite(v)) throw Error(ErrorCode::NanDetected, "non-finite velocity");
    }
    for (double v : u.ydata()) {
        if (!std::isfinite(v)) throw Error(ErrorCode::NanDetected, "non-finite velocity");
    }
    (void)grid;
}

// Centred face derivative of a staggered field; neighbours missing or dead are mirrored.
void face_derivatives(const Grid& grid, const FaceField& f, FaceField& ddx, FaceField& ddy) {
    const int nx = grid.nx(), ny = grid.ny();
    const double inv = 0.5 / grid.h();
    ddx = FaceField(nx, ny);
    ddy = FaceField(nx, ny);
    auto xval = [&](int i, int j, double c) {
        if (i < 0 || i > nx || j < 0 || j >= ny || grid.xface_kind(i, j) == FaceKind::Dead) return c;
        return f.x(i, j);
    };
    auto yval = [&](int i, int j, double c) {
        if (i < 0 || i >= nx || j < 0 || j > ny || grid.yface_kind(i, j) == FaceKind::Dead) return c;
        return f.y(i, j);
    };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            if (grid.xface_kind(i, j) == FaceKind::Dead) continue;
            const double c = f.x(i, j);
            ddx.x(i, j) = (xval(i + 1, j, c) - xval(i - 1, j, c)) * inv;
            ddy.x(i, j) = (xval(i, j + 1, c) - xval(i, j - 1, c)) * inv;
        }
    }
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (grid.yface_kind(i, j) == FaceKind::Dead) continue;
            const double c = f.y(i, j);
            ddx.y(i, j) = (yval(i + 1, j, c) - yval(i - 1, j, c)) * inv;
            ddy.y(i, j) = (yval(i, j + 1, c) - yval(i, j - 1, c)) * inv;
        }
    }
}

FaceField combine(double a, const FaceField& fa, double b, const FaceField& fb) {
    FaceField out = fa;
    for (auto& v : out.xdata()) v *= a;
    for (auto& v : out.ydata()) v *= a;
    axpy(b, fb, out);
    return out;
}

FaceField momentum_density(const Grid& grid, const ScalarField& rho, const FaceField& u) {
    FaceField m = face_average(grid, rho);
    for (std::size_t k = 0; k < m.xdata().size(); ++k) m.xdata()[k] *= u.xdata()[k];
    for (std::size_t k = 0; k < m.ydata().size(); ++k) m.ydata()[k] *= u.ydata()[k];
    return m;
}

}  // namespace

FluidState init_state(const CompressibleModel& model, const IllPreparedData& data) {
    const Grid& grid = model.grid;
    if (!(data.eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
    const double l2 = cell_norm(grid, data.density_perturbation);
    double linf = 0.0;
    for (int k = 0; k < grid.active_count(); ++k) {
        const auto [i, j] = grid.active_cell(k);
        linf = std::max(linf, std::abs(data.density_perturbation(i, j)));
    }
    if (l2 > data.bound || linf > data.bound) {
        throw Error(ErrorCode::InvalidArgument, "density perturbation exceeds its bound " + fmt(data.bound));
    }
    FluidState s;
    s.eps = data.eps;
    s.time = 0.0;
    s.density = ScalarField(grid.nx(), grid.ny(), model.law.reference_density);
    for (int k = 0; k < grid.active_count(); ++k) {
        const auto [i, j] = grid.active_cell(k);
        const double rho = model.law.reference_density + data.eps * data.density_perturbation(i, j);
        if (!(rho > 0.0)) {
            throw Error(ErrorCode::Vacuum, "initial density " + fmt(rho) + " at cell (" + std::to_string(i) + ", " +
                                               std::to_string(j) + ")");
        }
        s.density(i, j) = rho;
    }
    s.velocity = data.velocity;
    apply_wall_values(grid, s.velocity, model.path.eval(0.0).velocity);
    return s;
}

double stable_time_step(const CompressibleModel& model, const FluidState& state, double cfl) {
    const Grid& grid = model.grid;
    double rho_max = 0.0, rho_min = 1e300;
    for (int k = 0; k < grid.active_count(); ++k) {
        const auto [i, j] = grid.active_cell(k);
        rho_max = std::max(rho_max, state.density(i, j));
        rho_min = std::min(rho_min, state.density(i, j));
    }
    const double h = grid.h();
    const double c = std::sqrt(model.law.slope(rho_max));
    const double frame = model.path.eval(std::min(state.time, model.path.horizon())).velocity.norm();
    double limit = state.eps * h / c;
    const double speed = max_face_speed(grid, state.velocity) + frame;
    if (speed > 0.0) limit = std::min(limit, h / speed);
    // Rusanov diffusion followed by the symplectic pressure update is stable
    // for the checkerboard mode only if 8 (lam r + (c r / eps)^2) <= 4, r = dt/h.
    // At cfl = 0.4 the acoustic bound alone would violate this.
    const double ce = c / state.eps, lam = ce + speed;
    const double r = (-lam + std::sqrt(lam * lam + 2.0 * ce * ce)) / (2.0 * ce * ce);
    const double nu = 4.0 / 3.0 * model.visc.shear + model.visc.bulk;
    if (nu > 0.0) limit = std::min(limit, h * h * rho_min / (4.0 * nu));
    return std::min(cfl * limit, 0.9 * r * h);
}

void advance(FluidState& state, const CompressibleModel& model, double dt, double cfl, StepLog* log) {
    const Grid& grid = model.grid;
    const PressureLaw& law = model.law;
    const int nx = grid.nx(), ny = grid.ny();
    const double h = grid.h();
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "time step must be positive");
    if (cfl > 0.4 + 1e-12) throw Error(ErrorCode::CflViolation, "CFL factor " + fmt(cfl) + " exceeds 0.4");
    const double limit = stable_time_step(model, state, cfl);
    if (dt > limit * (1.0 + 1e-12)) {
        throw Error(ErrorCode::CflViolation, "dt=" + fmt(dt) + " exceeds the stable step " + fmt(limit));
    }
    const Vec2 frame = model.path.eval(state.time).velocity;
    const Vec2 wall_next = model.path.eval(state.time + dt).velocity;
    const double eps = state.eps;
    const double rb = law.reference_density;
    const ScalarField& rho = state.density;
    FaceField& u = state.velocity;

    ScalarField sound(nx, ny);
    for (int k = 0; k < grid.active_count(); ++k) {
        const auto [i, j] = grid.active_cell(k);
        sound(i, j) = std::sqrt(law.slope(rho(i, j))) / eps;
    }

    // Mass fluxes.
    FaceField flux(nx, ny);
    double boundary_outflow = 0.0;
    auto rusanov = [](double rl, double rr, double w, double cl, double cr) {
        const double lam = std::abs(w) + std::max(cl, cr);
        return 0.5 * (rl + rr) * w - 0.5 * lam * (rr - rl);
    };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            const FaceKind kind = grid.xface_kind(i, j);
            if (kind == FaceKind::Open) {
                flux.x(i, j) = rusanov(rho(i - 1, j), rho(i, j), u.x(i, j) - frame.x, sound(i - 1, j), sound(i, j));
            } else if (kind == FaceKind::Wall && grid.xface_on_box_edge(i)) {
                const double w = u.x(i, j) - frame.x;
                const double inside = i == 0 ? rho(0, j) : rho(nx - 1, j);
                const bool inflow = i == 0 ? w > 0.0 : w < 0.0;
                flux.x(i, j) = w * (inflow ? rb : inside);
                boundary_outflow += i == 0 ? -flux.x(i, j) : flux.x(i, j);
            }
        }
    }
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const FaceKind kind = grid.yface_kind(i, j);
            if (kind == FaceKind::Open) {
                flux.y(i, j) = rusanov(rho(i, j - 1), rho(i, j), u.y(i, j) - frame.y, sound(i, j - 1), sound(i, j));
            } else if (kind == FaceKind::Wall && grid.yface_on_box_edge(j)) {
                const double w = u.y(i, j) - frame.y;
                const double inside = j == 0 ? rho(i, 0) : rho(i, ny - 1);
                const bool inflow = j == 0 ? w > 0.0 : w < 0.0;
                flux.y(i, j) = w * (inflow ? rb : inside);
                boundary_outflow += j == 0 ? -flux.y(i, j) : flux.y(i, j);
            }
        }
    }

    ScalarField next = rho;
    const double ratio = dt / h;
    // Relaxation rate scales with the sound speed so acoustic waves are absorbed
    // within the rim at every eps.
    const double sponge_rate =
        model.sponge_width > 0.0 ? kSpongeStrength * std::sqrt(law.reference_slope()) / (eps * model.sponge_width) : 0.0;
    double sponge_change = 0.0;
    for (int k = 0; k < grid.active_count(); ++k) {
        const auto [i, j] = grid.active_cell(k);
        double r = rho(i, j) - ratio * (flux.x(i + 1, j) - flux.x(i, j) + flux.y(i, j + 1) - flux.y(i, j));
        if (model.sponge_width > 0.0) {
            const double s = 1.0 - std::exp(-sponge_rate * dt * sponge_profile(grid, grid.cell_center(i, j), model.sponge_width));
            const double delta = -s * (r - rb);
            r += delta;
            sponge_change += delta;
        }
        if (!std::isfinite(r)) throw Error(ErrorCode::NanDetected, "non-finite density");
        if (!(r > 0.0)) {
            throw Error(ErrorCode::Vacuum, "density " + fmt(r) + " at cell (" + std::to_string(i) + ", " +
                                               std::to_string(j) + ")");
        }
        next(i, j) = r;
    }

    // Velocity update with the new density.
    const FaceField adv = advection(grid, u, frame);
    const FaceField visc_force = tensor_divergence(grid, stress_field(grid, model.visc, velocity_gradient(grid, u)));
    ScalarField pressure(nx, ny);
    for (int k = 0; k < grid.active_count(); ++k) {
        const auto [i, j] = grid.active_cell(k);
        pressure(i, j) = law.pressure(next(i, j));
    }
    const double inv_eps2_h = 1.0 / (eps * eps * h);
    for (int j = 0; j < ny; ++j) {
        for (int i = 1; i < nx; ++i) {
            if (grid.xface_kind(i, j) != FaceKind::Open) continue;
            const double rf = 0.5 * (next(i - 1, j) + next(i, j));
            const double dp = (pressure(i, j) - pressure(i - 1, j)) * inv_eps2_h;
            double v = u.x(i, j) + dt * (-adv.x(i, j) + (visc_force.x(i, j) - dp) / rf);
            if (model.sponge_width > 0.0) v *= std::exp(-sponge_rate * dt * sponge_profile(grid, grid.xface_center(i, j), model.sponge_width));
            u.x(i, j) = v;
        }
    }
    for (int j = 1; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (grid.yface_kind(i, j) != FaceKind::Open) continue;
            const double rf = 0.5 * (next(i, j - 1) + next(i, j));
            const double dp = (pressure(i, j) - pressure(i, j - 1)) * inv_eps2_h;
            double v = u.y(i, j) + dt * (-adv.y(i, j) + (visc_force.y(i, j) - dp) / rf);
            if (model.sponge_width > 0.0) v *= std::exp(-sponge_rate * dt * sponge_profile(grid, grid.yface_center(i, j), model.sponge_width));
            u.y(i, j) = v;
        }
    }
    apply_wall_values(grid, u, wall_next);
    check_finite_velocity(grid, u);

    state.density = std::move(next);
    state.time += dt;
    if (log) {
        log->sponge_mass_change = sponge_change * grid.cell_area();
        log->boundary_mass_change = -dt * h * boundary_outflow;
    }
}

double total_mass(const Grid& grid, const ScalarField& rho) {
    double s = 0.0;
    for (int k = 0; k < grid.active_count(); ++k) {
        const auto [i, j] = grid.active_cell(k);
        s += rho(i, j);
    }
    return s * grid.cell_area();
}

double kinetic_energy(const Grid& grid, const ScalarField& rho, const FaceField& u) {
    const FaceField m = momentum_density(grid, rho, u);
    return 0.5 * face_inner(grid, m, u);
}

double internal_energy(const Grid& grid, const PressureLaw& law, const ScalarField& rho, double eps) {
    double s = 0.0;
    for (int k = 0; k < grid.active_count(); ++k) {
        const auto [i, j] = grid.active_cell(k);
        s += law.relative_entropy(rho(i, j));
    }
    return s * grid.cell_area() / (eps * eps);
}

std::vector<double> Schedule::times() const {
    if (!(horizon >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative horizon");
    if (horizon == 0.0) return {0.0};
    if (snapshots < 2) throw Error(ErrorCode::InvalidArgument, "at least two snapshots are needed for T > 0");
    std::vector<double> t(static_cast<std::size_t>(snapshots));
    for (int k = 0; k < snapshots; ++k) t[k] = horizon * k / (snapshots - 1);
    t.back() = horizon;
    return t;
}

ExtensionBasis::ExtensionBasis(const Grid& grid, double support_radius) : available_(true) {
    bx_ = build_extension_field(grid, MotionPath::linear({1.0, 0.0}, 1.0), 0.0, support_radius).value;
    by_ = build_extension_field(grid, MotionPath::linear({0.0, 1.0}, 1.0), 0.0, support_radius).value;
    face_derivatives(grid, bx_, dbx_dx_, dbx_dy_);
    face_derivatives(grid, by_, dby_dx_, dby_dy_);
    grad_x_ = velocity_gradient(grid, bx_);
    grad_y_ = velocity_gradient(grid, by_);
}

FaceField ExtensionBasis::value(Vec2 v) const { return combine(v.x, bx_, v.y, by_); }

FaceField ExtensionBasis::material_rate(Vec2 v, Vec2 a) const {
    FaceField out = combine(a.x, bx_, a.y, by_);
    axpy(-v.x * v.x, dbx_dx_, out);
    axpy(-v.x * v.y, dby_dx_, out);
    axpy(-v.y * v.x, dbx_dy_, out);
    axpy(-v.y * v.y, dby_dy_, out);
    return out;
}

EnergyRecord energy_report(const FluidState& state, const CompressibleModel& model, const FaceField& extension,
                           const EnergyAccumulators& acc, double tolerance_rel) {
    const Grid& grid = model.grid;
    EnergyRecord r;
    r.time = state.time;
    r.eps = state.eps;
    r.lhs = kinetic_energy(grid, state.density, state.velocity) +
            internal_energy(grid, model.law, state.density, state.eps) + acc.dissipation;
    const double coupling_now = face_inner(grid, momentum_density(grid, state.density, state.velocity), extension);
    r.rhs = acc.initial_energy + coupling_now - acc.initial_coupling + acc.coupling;
    r.tolerance = tolerance_rel * (acc.initial_energy + acc.extension_scale);
    r.flag = r.lhs <= r.rhs + r.tolerance;
    return r;
}

EnergyMonitor::EnergyMonitor(const CompressibleModel& model, double support_radius, double tolerance_rel)
    : model_(&model), tolerance_rel_(tolerance_rel) {
    const Grid& grid = model.grid;
    if (grid.has_obstacle() && model.path.kind() != MotionPath::Kind::Static) {
        const double radius = support_radius > 0.0
                                  ? support_radius
                                  : default_extension_radius(grid.obstacle_radius(), grid.half_extent(),
                                                             model.sponge_width);
        basis_ = ExtensionBasis(grid, radius);
    }
}

void EnergyMonitor::start(const FluidState& initial) {
    const Grid& grid = model_->grid;
    acc_ = EnergyAccumulators{};
    acc_.initial_energy = kinetic_energy(grid, initial.density, initial.velocity) +
                          internal_energy(grid, model_->law, initial.density, initial.eps);
    if (!basis_.empty()) {
        const FaceField v = basis_.value(model_->path.eval(initial.time).velocity);
        acc_.initial_coupling = face_inner(grid, momentum_density(grid, initial.density, initial.velocity), v);
    }
}

void EnergyMonitor::accumulate(const FluidState& state, double dt) {
    const Grid& grid = model_->grid;
    const GradientField grad = velocity_gradient(grid, state.velocity);
    const TensorField stress = stress_field(grid, model_->visc, grad);
    acc_.dissipation += dt * tensor_contract(grid, stress, grad);
    if (basis_.empty()) return;
    const MotionSample m = model_->path.eval(state.time);
    const TensorField flux = momentum_flux(grid, state.density, state.velocity);
    const double stress_work = m.velocity.x * tensor_contract(grid, stress, basis_.gradient_x()) +
                               m.velocity.y * tensor_contract(grid, stress, basis_.gradient_y());
    const double convective = m.velocity.x * tensor_contract(grid, flux, basis_.gradient_x()) +
                              m.velocity.y * tensor_contract(grid, flux, basis_.gradient_y());
    const double rate = face_inner(grid, momentum_density(grid, state.density, state.velocity),
                                   basis_.material_rate(m.velocity, m.acceleration));
    acc_.coupling += dt * (stress_work - convective - rate);
}

EnergyRecord EnergyMonitor::record(const FluidState& state) {
    const Grid& grid = model_->grid;
    FaceField v(grid.nx(), grid.ny());
    if (!basis_.empty()) {
        v = basis_.value(model_->path.eval(state.time).velocity);
        const double scale = 0.5 * model_->law.reference_density * face_inner(grid, v, v);
        acc_.extension_scale = std::max(acc_.extension_scale, scale);
    }
    return energy_report(state, *model_, v, acc_, tolerance_rel_);
}

RunSummary run(const CompressibleModel& model, FluidState state, const Schedule& schedule, const RunOptions& options,
               const SnapshotObserver& observer) {
    const std::vector<double> times = schedule.times();
    if (times.back() > model.path.horizon() * (1.0 + 1e-12)) {
        throw Error(ErrorCode::OutOfHorizon, "schedule ends after the motion horizon");
    }
    RunSummary summary;
    EnergyMonitor monitor(model, options.extension_radius, options.energy_tolerance);
    monitor.start(state);
    summary.mass.initial = total_mass(model.grid, state.density);
    auto emit = [&](int index) {
        const EnergyRecord rec = monitor.record(state);
        summary.energy.push_back(rec);
        if (observer) observer(index, state, rec);
    };
    emit(0);
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double target = times[k];
        while (state.time < target) {
            double dt = options.dt.fixed ? *options.dt.fixed : stable_time_step(model, state, options.dt.cfl);
            bool last = false;
            if (state.time + dt >= target - 1e-12 * std::max(1.0, target)) {
                dt = target - state.time;
                last = true;
            }
            StepLog log;
            try {
                monitor.accumulate(state, dt);
                advance(state, model, dt, options.dt.cfl, &log);
            } catch (const Error& e) {
                throw Error(e.code(), "step " + std::to_string(summary.steps) + " (t=" + fmt(state.time) +
                                          "): " + e.detail());
            }
            if (last) state.time = target;
            summary.mass.sponge += log.sponge_mass_change;
            summary.mass.boundary += log.boundary_mass_change;
            ++summary.steps;
        }
        emit(static_cast<int>(k));
    }
    summary.mass.final = total_mass(model.grid, state.density);
    return summary;
}

Trajectory run_trajectory(const CompressibleModel& model, FluidState initial, const Schedule& schedule,
                          const RunOptions& options) {
    Trajectory traj;
    traj.summary = run(model, std::move(initial), schedule, options,
                       [&](int, const FluidState& s, const EnergyRecord&) { traj.snapshots.push_back(s); });
    return traj;
}

}  // namespace lowmach
