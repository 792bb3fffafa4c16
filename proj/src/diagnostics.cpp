#include "lowmach/diagnostics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "lowmach/error.hpp"

namespace lowmach {

namespace {

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

FaceField face_momentum(const Grid& grid, const ScalarField& rho, const FaceField& u) {
    FaceField m = face_average(grid, rho);
    for (std::size_t n = 0; n < m.xdata().size(); ++n) m.xdata()[n] *= u.xdata()[n];
    for (std::size_t n = 0; n < m.ydata().size(); ++n) m.ydata()[n] *= u.ydata()[n];
    return m;
}

}  // namespace

EssResSplit split_ess_res(const Grid& grid, const ScalarField& rho, const ScalarField& f, double rho_bar) {
    EssResSplit s{ScalarField(grid.nx(), grid.ny()), ScalarField(grid.nx(), grid.ny()),
                  ScalarField(grid.nx(), grid.ny())};
    for (int k = 0; k < grid.active_count(); ++k) {
        const auto [i, j] = grid.active_cell(k);
        if (essential_density(rho(i, j), rho_bar)) {
            s.indicator(i, j) = 1.0;
            s.essential(i, j) = f(i, j);
        } else {
            s.residual(i, j) = f(i, j);
        }
    }
    return s;
}

std::string metrics_csv_header() { return "run_id,eps,metric_name,q,window,t_or_sup,value"; }

std::string to_csv_row(const MetricsRecord& r) {
    return r.run_id + "," + format_number(r.eps) + "," + r.metric + "," + format_number(r.q) + "," + r.window + "," +
           (r.time ? format_number(*r.time) : std::string("sup")) + "," + format_number(r.value);
}

std::string Window::tag() const { return "annulus[" + format_number(inner) + ";" + format_number(outer) + "]"; }

double l2_in_time(const std::vector<double>& times, const std::vector<double>& values) {
    double s = 0.0;
    for (std::size_t n = 1; n < times.size(); ++n) {
        s += 0.5 * (times[n] - times[n - 1]) * (values[n - 1] * values[n - 1] + values[n] * values[n]);
    }
    return std::sqrt(s);
}

UniformEstimateMonitor::UniformEstimateMonitor(const Grid& grid, const PressureLaw& law, double eps, double q)
    : grid_(&grid), law_(law), eps_(eps), q_(q) {
    if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
    if (!(q >= 1.0)) throw Error(ErrorCode::InvalidArgument, "norm exponent must be at least 1");
}

void UniformEstimateMonitor::add(const FluidState& state) {
    const Grid& grid = *grid_;
    const double rho_bar = law_.reference_density;
    const double area = grid.cell_area();
    double ess_sq = 0.0, res_gamma = 0.0, res_measure = 0.0, res_q = 0.0;
    for (int k = 0; k < grid.active_count(); ++k) {
        const auto [i, j] = grid.active_cell(k);
        const double rho = state.density(i, j);
        const double fl = (rho - rho_bar) / eps_;
        if (essential_density(rho, rho_bar)) {
            ess_sq += fl * fl;
        } else {
            res_gamma += std::pow(std::abs(rho), law_.gamma);
            res_measure += 1.0;
            res_q += std::pow(std::abs(fl), q_);
        }
    }
    sup_ess_l2_ = std::max(sup_ess_l2_, std::sqrt(area * ess_sq));
    sup_res_lgamma_ = std::max(sup_res_lgamma_, std::pow(area * res_gamma, 1.0 / law_.gamma));
    sup_res_measure_ = std::max(sup_res_measure_, area * res_measure);
    sup_res_lq_ = std::max(sup_res_lq_, std::pow(area * res_q, 1.0 / q_));
    sup_momentum_ = std::max(sup_momentum_, std::sqrt(2.0 * kinetic_energy(grid, state.density, state.velocity)));

    const GradientField g = velocity_gradient(grid, state.velocity);
    const double h1_sq = face_inner(grid, state.velocity, state.velocity) + tensor_contract(grid, g, g);
    if (count_ > 0) h1_integral_ += 0.5 * (state.time - last_time_) * (last_h1_sq_ + h1_sq);
    last_time_ = state.time;
    last_h1_sq_ = h1_sq;
    ++count_;
}

std::vector<MetricsRecord> UniformEstimateMonitor::report(const std::string& run_id) const {
    auto rec = [&](const char* name, double q, double v) { return MetricsRecord{run_id, eps_, name, q, "full", {}, v}; };
    return {
        rec("density_fluctuation_essential", 2.0, sup_ess_l2_),
        rec("density_residual", law_.gamma, sup_res_lgamma_),
        rec("residual_measure", 1.0, sup_res_measure_),
        rec("density_fluctuation_residual", q_, sup_res_lq_),
        rec("velocity_l2_h1", 2.0, std::sqrt(h1_integral_)),
        rec("momentum_sup_l2", 2.0, sup_momentum_),
    };
}

std::vector<MetricsRecord> uniform_estimate_report(const Grid& grid, const std::vector<FluidState>& trajectory,
                                                   const PressureLaw& law, double eps, double q,
                                                   const std::string& run_id) {
    if (trajectory.empty()) throw Error(ErrorCode::InvalidArgument, "empty trajectory");
    UniformEstimateMonitor m(grid, law, eps, q);
    for (const auto& s : trajectory) m.add(s);
    return m.report(run_id);
}

FaceField vortex_test_field(const Grid& grid, const Window& window) {
    const double mid = 0.5 * (window.inner + window.outer);
    const double radius = 0.45 * (window.outer - window.inner);
    const Vec2 centre{0.0, mid};
    NodeField psi(grid.nx(), grid.ny());
    for (int j = 0; j <= grid.ny(); ++j) {
        for (int i = 0; i <= grid.nx(); ++i) {
            if (!grid.node_interior(i, j)) continue;
            const Vec2 d = grid.node(i, j) - centre;
            const double s = d.dot(d) / (radius * radius);
            if (s < 1.0) psi(i, j) = (1.0 - s) * (1.0 - s) * (1.0 - s);
        }
    }
    FaceField phi(grid.nx(), grid.ny());
    const double h = grid.h();
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i <= grid.nx(); ++i) {
            if (grid.xface_kind(i, j) == FaceKind::Open) phi.x(i, j) = (psi(i, j + 1) - psi(i, j)) / h;
        }
    }
    for (int j = 0; j <= grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            if (grid.yface_kind(i, j) == FaceKind::Open) phi.y(i, j) = -(psi(i + 1, j) - psi(i, j)) / h;
        }
    }
    return phi;
}

double assembly_identity_residual(const PoissonSolver& solver, const FaceField& w, const FaceField& phi) {
    const Grid& grid = solver.grid();
    const HelmholtzResult hw = helmholtz_project(solver, w);
    const HelmholtzResult hp = helmholtz_project(solver, phi);
    FaceField grad_part = phi;
    clear_non_open(grid, grad_part);
    axpy(-1.0, hp.solenoidal, grad_part);
    const double lhs = face_inner(grid, w, phi);
    const double rhs = face_inner(grid, w, hp.solenoidal) - cell_inner(grid, hw.potential, divergence_open(grid, grad_part));
    const double scale = face_norm(grid, w) * face_norm(grid, phi);
    return std::abs(lhs - rhs) / std::max(scale, 1e-300);
}

FaceField shifted_momentum(const Grid& grid, const FluidState& state, const PressureLaw& law, Vec2 obstacle_velocity,
                           const FaceField& extension) {
    FaceField w = face_momentum(grid, state.density, state.velocity);
    if (!extension.xdata().empty()) axpy(-law.reference_density, extension, w);
    ScalarField dev(grid.nx(), grid.ny());
    for (int k = 0; k < grid.active_count(); ++k) {
        const auto [i, j] = grid.active_cell(k);
        dev(i, j) = state.density(i, j) - law.reference_density;
    }
    const FaceField d = face_average(grid, dev);
    for (std::size_t n = 0; n < w.xdata().size(); ++n) w.xdata()[n] -= obstacle_velocity.x * d.xdata()[n];
    for (std::size_t n = 0; n < w.ydata().size(); ++n) w.ydata()[n] -= obstacle_velocity.y * d.ydata()[n];
    clear_non_open(grid, w);
    return w;
}

ConvergenceMonitor::ConvergenceMonitor(const Grid& grid, const PressureLaw& law, const MotionPath& path,
                                       const ExtensionBasis& extension, Window window, FaceField projected_test,
                                       FaceField test)
    : grid_(&grid), law_(law), path_(path), extension_(&extension), window_(window),
      projected_test_(std::move(projected_test)), test_(std::move(test)) {
    xmask_.assign(static_cast<std::size_t>(grid.nx() + 1) * grid.ny(), 0);
    ymask_.assign(static_cast<std::size_t>(grid.nx()) * (grid.ny() + 1), 0);
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i <= grid.nx(); ++i) {
            xmask_[static_cast<std::size_t>(j) * (grid.nx() + 1) + i] =
                grid.xface_kind(i, j) == FaceKind::Open && window_.contains(grid.xface_center(i, j));
        }
    }
    for (int j = 0; j <= grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            ymask_[static_cast<std::size_t>(j) * grid.nx() + i] =
                grid.yface_kind(i, j) == FaceKind::Open && window_.contains(grid.yface_center(i, j));
        }
    }
}

void ConvergenceMonitor::add(const FluidState& state, const FaceField& reference_velocity, double reference_time) {
    if (std::abs(state.time - reference_time) > 1e-9 * std::max(1.0, std::abs(reference_time))) {
        throw Error(ErrorCode::ScheduleMismatch, "compressible snapshot at t=" + std::to_string(state.time) +
                                                     " paired with reference at t=" + std::to_string(reference_time));
    }
    const Grid& grid = *grid_;
    if (times_.empty()) {
        eps_ = state.eps;
    } else if (!(state.time > times_.back())) {
        throw Error(ErrorCode::ScheduleMismatch, "snapshot times must increase");
    }
    const double rho_bar = law_.reference_density;
    double dev = 0.0;
    for (int k = 0; k < grid.active_count(); ++k) {
        const auto [i, j] = grid.active_cell(k);
        const double d = state.density(i, j) - rho_bar;
        dev += d * d;
    }
    sup_density_ = std::max(sup_density_, std::sqrt(grid.cell_area() * dev) / state.eps);

    double vel = 0.0;
    const auto& ux = state.velocity.xdata();
    const auto& uy = state.velocity.ydata();
    const auto& rx = reference_velocity.xdata();
    const auto& ry = reference_velocity.ydata();
    for (std::size_t n = 0; n < ux.size(); ++n) {
        if (xmask_[n]) vel += (ux[n] - rx[n]) * (ux[n] - rx[n]);
    }
    for (std::size_t n = 0; n < uy.size(); ++n) {
        if (ymask_[n]) vel += (uy[n] - ry[n]) * (uy[n] - ry[n]);
    }
    series_velocity_.push_back(std::sqrt(grid.cell_area() * vel));

    const Vec2 m1 = path_.eval(state.time).velocity;
    FaceField v = extension_->empty() ? FaceField(grid.nx(), grid.ny()) : extension_->value(m1);
    const FaceField w = shifted_momentum(grid, state, law_, m1, v);
    FaceField limit = reference_velocity;
    axpy(-1.0, v, limit);
    const double a = face_inner(grid, w, projected_test_);
    const double b = rho_bar * face_inner(grid, limit, test_);
    series_diff_.push_back(a - b);
    times_.push_back(state.time);
}

double ConvergenceMonitor::velocity_error() const { return l2_in_time(times_, series_velocity_); }
double ConvergenceMonitor::solenoidal_error() const { return l2_in_time(times_, series_diff_); }

std::vector<MetricsRecord> ConvergenceMonitor::report(const std::string& run_id) const {
    return {
        MetricsRecord{run_id, eps_, "density_deviation_over_eps", 2.0, "full", {}, sup_density_},
        MetricsRecord{run_id, eps_, "velocity_error", 2.0, window_.tag(), {}, velocity_error()},
        MetricsRecord{run_id, eps_, "solenoidal_error", 2.0, window_.tag(), {}, solenoidal_error()},
    };
}

std::vector<MetricsRecord> convergence_metrics(const Grid& grid, const PressureLaw& law, const MotionPath& path,
                                               const std::vector<FluidState>& compressible,
                                               const std::vector<IncompressibleState>& reference,
                                               const PoissonSolver& solver, const Window& window,
                                               double extension_radius, const std::string& run_id) {
    if (compressible.size() != reference.size()) {
        throw Error(ErrorCode::ScheduleMismatch, std::to_string(compressible.size()) + " compressible snapshots vs " +
                                                     std::to_string(reference.size()) + " reference snapshots");
    }
    if (compressible.empty()) throw Error(ErrorCode::InvalidArgument, "empty trajectory");
    ExtensionBasis basis;
    if (grid.has_obstacle() && path.kind() != MotionPath::Kind::Static) basis = ExtensionBasis(grid, extension_radius);
    FaceField phi = vortex_test_field(grid, window);
    FaceField hphi = helmholtz_project(solver, phi).solenoidal;
    ConvergenceMonitor m(grid, law, path, basis, window, std::move(hphi), std::move(phi));
    for (std::size_t n = 0; n < compressible.size(); ++n) m.add(compressible[n], reference[n].velocity, reference[n].time);
    return m.report(run_id);
}

}  // namespace lowmach
