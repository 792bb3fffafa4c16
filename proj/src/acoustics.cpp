#include "lowmach/acoustics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lowmach/diagnostics.hpp"
#include "lowmach/error.hpp"

namespace lowmach {

namespace {

bool is_kernel(double lambda) { return !(lambda > 0.0); }

struct ModeRotation {
    double omega = 0.0;
    double kappa = 0.0;
};

ModeRotation rotation(double sound_slope, double lambda, double eps) {
    return {std::sqrt(sound_slope * lambda) / eps, std::sqrt(sound_slope / lambda)};
}

// Integrals of sin(w(D - s)) and cos(w(D - s)) against 1 and s over [0, D].
struct PiecewiseWeights {
    double s0, s1, c0, c1;
};

PiecewiseWeights piecewise_weights(double omega, double delta) {
    const double th = omega * delta;
    if (th < 1e-2) {
        const double t2 = th * th;
        return {delta * th * (0.5 - t2 / 24.0 + t2 * t2 / 720.0),
                delta * delta * th * (1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0),
                delta * (1.0 - t2 / 6.0 + t2 * t2 / 120.0),
                delta * delta * (0.5 - t2 / 24.0 + t2 * t2 / 720.0)};
    }
    const double c = std::cos(th);
    const double s = std::sin(th);
    return {(1.0 - c) / omega, delta / omega - s / (omega * omega), s / omega, (1.0 - c) / (omega * omega)};
}

void rotate(const SpectralDecomposition& spectrum, double sound_slope, double eps, ModalState& st, double dt) {
    for (int k = 0; k < spectrum.modes(); ++k) {
        const double lambda = spectrum.eigenvalue(k);
        if (is_kernel(lambda)) {
            st.potential[k] = 0.0;
            continue;
        }
        const auto [omega, kappa] = rotation(sound_slope, lambda, eps);
        const double c = std::cos(omega * dt);
        const double s = std::sin(omega * dt);
        const double r = st.density[k];
        const double p = st.potential[k];
        st.density[k] = r * c + (p / kappa) * s;
        st.potential[k] = -kappa * r * s + p * c;
    }
    st.time += dt;
}

// a (x) b for a face field a and a constant vector b (or b (x) a when swap),
// diagonal entries at cells and off-diagonal entries at interior nodes.
TensorField outer_with_constant(const Grid& grid, const FaceField& a, Vec2 b, bool swap) {
    TensorField t(grid.nx(), grid.ny());
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            if (!grid.active(i, j)) continue;
            const double ax = 0.5 * (a.x(i, j) + a.x(i + 1, j));
            const double ay = 0.5 * (a.y(i, j) + a.y(i, j + 1));
            t.xx(i, j) = ax * b.x;
            t.yy(i, j) = ay * b.y;
        }
    }
    for (int j = 1; j < grid.ny(); ++j) {
        for (int i = 1; i < grid.nx(); ++i) {
            if (!grid.node_interior(i, j)) continue;
            const double ax = 0.5 * (a.x(i, j - 1) + a.x(i, j));
            const double ay = 0.5 * (a.y(i - 1, j) + a.y(i, j));
            if (swap) {
                t.xy(i, j) = b.x * ay;
                t.yx(i, j) = b.y * ax;
            } else {
                t.xy(i, j) = ax * b.y;
                t.yx(i, j) = ay * b.x;
            }
        }
    }
    return t;
}

void scale(TensorField& t, double s) {
    for (auto* f : {&t.xx.data(), &t.yy.data(), &t.xy.data(), &t.yx.data()}) {
        for (auto& v : *f) v *= s;
    }
}

// Face vector m * f_face where f is a cell field averaged to faces.
FaceField constant_times_scalar(const Grid& grid, Vec2 m, const ScalarField& f) {
    FaceField out = face_average(grid, f);
    for (auto& v : out.xdata()) v *= m.x;
    for (auto& v : out.ydata()) v *= m.y;
    clear_non_open(grid, out);
    return out;
}

FaceField momentum(const Grid& grid, const ScalarField& rho, const FaceField& u) {
    FaceField m = face_average(grid, rho);
    for (std::size_t n = 0; n < m.xdata().size(); ++n) m.xdata()[n] *= u.xdata()[n];
    for (std::size_t n = 0; n < m.ydata().size(); ++n) m.ydata()[n] *= u.ydata()[n];
    return m;
}

Eigen::VectorXd vector_force_coefficients(const SpectralDecomposition& spectrum, const FaceField& f) {
    Eigen::VectorXd c = spectrum.coefficients(divergence_open(spectrum.grid(), f));
    for (int k = 0; k < c.size(); ++k) {
        const double lambda = spectrum.eigenvalue(k);
        c[k] = is_kernel(lambda) ? 0.0 : -c[k] / lambda;
    }
    return c;
}

}  // namespace

ModalState to_modal(const SpectralDecomposition& spectrum, const AcousticState& state) {
    ModalState m;
    m.density = spectrum.coefficients(state.density_fluctuation);
    m.potential = spectrum.coefficients(state.potential);
    for (int k = 0; k < spectrum.modes(); ++k) {
        if (is_kernel(spectrum.eigenvalue(k))) m.potential[k] = 0.0;
    }
    m.time = state.time;
    return m;
}

AcousticState from_modal(const SpectralDecomposition& spectrum, const ModalState& state, double eps) {
    return {spectrum.synthesize(state.density), spectrum.synthesize(state.potential), eps, state.time};
}

double acoustic_energy(const SpectralDecomposition& spectrum, double sound_slope, const ModalState& state) {
    double e = 0.0;
    for (int k = 0; k < spectrum.modes(); ++k) {
        e += sound_slope * state.density[k] * state.density[k];
        e += spectrum.eigenvalue(k) * state.potential[k] * state.potential[k];
    }
    return e;
}

ModalState wave_propagate(const SpectralDecomposition& spectrum, const PressureLaw& law, double eps,
                          const ModalState& initial, double t) {
    if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
    ModalState st = initial;
    rotate(spectrum, law.reference_slope(), eps, st, t);
    st.time = initial.time + t;
    return st;
}

PropagatedState wave_propagate(const SpectralDecomposition& spectrum, const PressureLaw& law,
                               const AcousticState& initial, double t) {
    const ModalState out = wave_propagate(spectrum, law, initial.eps, to_modal(spectrum, initial), t);
    PropagatedState result;
    result.state = from_modal(spectrum, out, initial.eps);
    result.truncation_remainder = std::hypot(spectrum.truncation_remainder(initial.density_fluctuation),
                                             spectrum.truncation_remainder(initial.potential));
    return result;
}

std::vector<ModalState> duhamel_solve(const SpectralDecomposition& spectrum, const PressureLaw& law, double eps,
                                      const ModalState& initial, const ForcingSeries& forcing) {
    if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
    const auto& ts = forcing.times;
    if (ts.empty() || ts.size() != forcing.coefficients.size()) {
        throw Error(ErrorCode::InvalidArgument, "forcing samples and times differ in length");
    }
    if (std::abs(ts.front() - initial.time) > 1e-12 * std::max(1.0, std::abs(initial.time))) {
        throw Error(ErrorCode::ScheduleMismatch, "forcing does not start at the initial time");
    }
    const double c2 = law.reference_slope();
    std::vector<ModalState> out;
    out.reserve(ts.size());
    ModalState st = initial;
    st.time = ts.front();
    out.push_back(st);
    for (std::size_t n = 1; n < ts.size(); ++n) {
        const double delta = ts[n] - ts[n - 1];
        if (!(delta > 0.0)) throw Error(ErrorCode::ScheduleMismatch, "forcing times must increase");
        rotate(spectrum, c2, eps, st, delta);
        const Eigen::VectorXd& ha = forcing.coefficients[n - 1];
        const Eigen::VectorXd& hb = forcing.coefficients[n];
        for (int k = 0; k < spectrum.modes(); ++k) {
            const double lambda = spectrum.eigenvalue(k);
            if (is_kernel(lambda)) continue;
            const auto [omega, kappa] = rotation(c2, lambda, eps);
            const PiecewiseWeights w = piecewise_weights(omega, delta);
            const double slope = (hb[k] - ha[k]) / delta;
            st.density[k] += (ha[k] * w.s0 + slope * w.s1) / kappa;
            st.potential[k] += ha[k] * w.c0 + slope * w.c1;
        }
        st.time = ts[n];
        out.push_back(st);
    }
    return out;
}

ForcingFields assemble_forcing(const FluidState& state, const Grid& grid, const PressureLaw& law,
                               const ViscosityPair& visc, const MotionPath& path, const ExtensionBasis& extension) {
    const double eps = state.eps;
    const double rho_bar = law.reference_density;
    const MotionSample motion = path.eval(state.time);
    const ScalarField& rho = state.density;
    const FaceField& u = state.velocity;
    const int nx = grid.nx();
    const int ny = grid.ny();

    ScalarField fluct(nx, ny);
    ScalarField remainder(nx, ny);
    for (int k = 0; k < grid.active_count(); ++k) {
        const auto [i, j] = grid.active_cell(k);
        fluct(i, j) = (rho(i, j) - rho_bar) / eps;
        remainder(i, j) = law.pressure_remainder(rho(i, j)) / (eps * eps);
    }
    const EssResSplit rho_split = split_ess_res(grid, rho, rho, rho_bar);
    const EssResSplit fluct_split = split_ess_res(grid, rho, fluct, rho_bar);

    ForcingFields f;
    f.viscous = stress_field(grid, visc, velocity_gradient(grid, u));
    f.convective_essential = momentum_flux(grid, rho_split.essential, u);
    scale(f.convective_essential, -1.0);
    f.convective_residual = momentum_flux(grid, rho_split.residual, u);
    scale(f.convective_residual, -1.0);
    f.pressure_remainder = remainder;

    FaceField v(nx, ny);
    f.unsteady = FaceField(nx, ny);
    if (!extension.empty()) {
        v = extension.value(motion.velocity);
        f.unsteady = extension.material_rate(motion.velocity, motion.acceleration);
        for (auto& x : f.unsteady.xdata()) x *= -rho_bar;
        for (auto& x : f.unsteady.ydata()) x *= -rho_bar;
        clear_non_open(grid, f.unsteady);
    }

    FaceField shifted_ess = momentum(grid, rho_split.essential, u);
    axpy(-rho_bar, v, shifted_ess);
    const FaceField shifted_res = momentum(grid, rho_split.residual, u);
    f.translation_essential = outer_with_constant(grid, shifted_ess, motion.velocity, false);
    f.translation_residual = outer_with_constant(grid, shifted_res, motion.velocity, false);

    FaceField w = momentum(grid, rho, u);
    axpy(-rho_bar, v, w);
    axpy(-eps, constant_times_scalar(grid, motion.velocity, fluct), w);
    clear_non_open(grid, w);
    f.boundary_transport = outer_with_constant(grid, w, motion.velocity, true);
    scale(f.boundary_transport, eps);

    const Vec2 accel = (-eps) * motion.acceleration;
    f.acceleration_essential = constant_times_scalar(grid, accel, fluct_split.essential);
    f.acceleration_residual = constant_times_scalar(grid, accel, fluct_split.residual);
    return f;
}

std::string_view to_string(ForcingTerm term) {
    switch (term) {
        case ForcingTerm::Viscous: return "viscous";
        case ForcingTerm::ConvectiveEssential: return "convective_essential";
        case ForcingTerm::ConvectiveResidual: return "convective_residual";
        case ForcingTerm::PressureRemainder: return "pressure_remainder";
        case ForcingTerm::Unsteady: return "unsteady";
        case ForcingTerm::TranslationEssential: return "translation_essential";
        case ForcingTerm::TranslationResidual: return "translation_residual";
        case ForcingTerm::BoundaryTransport: return "boundary_transport";
        case ForcingTerm::AccelerationEssential: return "acceleration_essential";
        case ForcingTerm::AccelerationResidual: return "acceleration_residual";
    }
    return "unknown";
}

std::vector<double> allowed_powers(ForcingTerm term) {
    switch (term) {
        case ForcingTerm::Viscous: return {0.0, -1.0};
        case ForcingTerm::ConvectiveEssential: return {0.5, 0.0, -0.5, -1.0};
        case ForcingTerm::ConvectiveResidual: return {1.0, 0.0, -1.0};
        case ForcingTerm::PressureRemainder: return {1.0, 0.5, 0.0};
        case ForcingTerm::Unsteady: return {-0.5};
        case ForcingTerm::TranslationEssential: return {0.0, -1.0};
        case ForcingTerm::TranslationResidual: return {1.0, 0.0, -1.0};
        case ForcingTerm::BoundaryTransport: return {1.0, 0.0, -1.0};
        case ForcingTerm::AccelerationEssential: return {-0.5};
        case ForcingTerm::AccelerationResidual: return {1.0, 0.0};
    }
    return {};
}

int channel_of_power(double s) {
    const double i = 2.0 * s + 3.0;
    const long r = std::lround(i);
    if (std::abs(i - static_cast<double>(r)) > 1e-12 || r < 1 || r > 5) {
        throw Error(ErrorCode::InvalidArgument, "power " + std::to_string(s) + " has no channel");
    }
    return static_cast<int>(r);
}

Eigen::VectorXd forcing_coefficients(const SpectralDecomposition& spectrum, const ForcingFields& fields,
                                     ForcingTerm term) {
    const Grid& grid = spectrum.grid();
    switch (term) {
        case ForcingTerm::Viscous: return vector_force_coefficients(spectrum, tensor_divergence(grid, fields.viscous));
        case ForcingTerm::ConvectiveEssential:
            return vector_force_coefficients(spectrum, tensor_divergence(grid, fields.convective_essential));
        case ForcingTerm::ConvectiveResidual:
            return vector_force_coefficients(spectrum, tensor_divergence(grid, fields.convective_residual));
        case ForcingTerm::PressureRemainder: {
            Eigen::VectorXd c = spectrum.coefficients(fields.pressure_remainder);
            for (int k = 0; k < c.size(); ++k) {
                if (is_kernel(spectrum.eigenvalue(k))) c[k] = 0.0;
            }
            return c;
        }
        case ForcingTerm::Unsteady: return vector_force_coefficients(spectrum, fields.unsteady);
        case ForcingTerm::TranslationEssential:
            return vector_force_coefficients(spectrum, tensor_divergence(grid, fields.translation_essential));
        case ForcingTerm::TranslationResidual:
            return vector_force_coefficients(spectrum, tensor_divergence(grid, fields.translation_residual));
        case ForcingTerm::BoundaryTransport:
            return vector_force_coefficients(spectrum, tensor_divergence(grid, fields.boundary_transport));
        case ForcingTerm::AccelerationEssential:
            return vector_force_coefficients(spectrum, fields.acceleration_essential);
        case ForcingTerm::AccelerationResidual:
            return vector_force_coefficients(spectrum, fields.acceleration_residual);
    }
    return Eigen::VectorXd::Zero(spectrum.modes());
}

Eigen::VectorXd total_forcing(const SpectralDecomposition& spectrum, const ForcingFields& fields) {
    Eigen::VectorXd h = Eigen::VectorXd::Zero(spectrum.modes());
    for (ForcingTerm term : kForcingTerms) h += forcing_coefficients(spectrum, fields, term);
    return h;
}

ChannelSplit route_to_channels(const SpectralDecomposition& spectrum,
                               const std::vector<std::pair<ForcingTerm, Eigen::VectorXd>>& terms) {
    const int modes = spectrum.modes();
    ChannelSplit split;
    for (auto& c : split.channels) c = Eigen::VectorXd::Zero(modes);
    for (const auto& [term, coeff] : terms) {
        const std::vector<double> powers = allowed_powers(term);
        const double hi = *std::max_element(powers.begin(), powers.end());
        const double lo = *std::min_element(powers.begin(), powers.end());
        for (int k = 0; k < modes; ++k) {
            const double lambda = spectrum.eigenvalue(k);
            if (is_kernel(lambda) || coeff[k] == 0.0) continue;
            const double s = lambda >= 1.0 ? hi : lo;
            split.channels[channel_of_power(s) - 1][k] += coeff[k] / std::pow(lambda, s);
        }
    }
    for (int i = 0; i < 5; ++i) split.norms[i] = split.channels[i].norm();
    return split;
}

ChannelSplit forcing_channels(const SpectralDecomposition& spectrum, const ForcingFields& fields) {
    std::vector<std::pair<ForcingTerm, Eigen::VectorXd>> terms;
    terms.reserve(kForcingTerms.size());
    for (ForcingTerm term : kForcingTerms) terms.emplace_back(term, forcing_coefficients(spectrum, fields, term));
    return route_to_channels(spectrum, terms);
}

void ChannelSeries::append(double t, const ChannelSplit& split) {
    if (!times_.empty() && !(t > times_.back())) {
        throw Error(ErrorCode::ScheduleMismatch, "channel samples must have increasing times");
    }
    times_.push_back(t);
    norms_.push_back(split.norms);
}

std::array<double, 5> ChannelSeries::time_norms() const {
    std::array<double, 5> out{};
    for (std::size_t n = 1; n < times_.size(); ++n) {
        const double dt = times_[n] - times_[n - 1];
        for (int i = 0; i < 5; ++i) {
            out[i] += 0.5 * dt * (norms_[n - 1][i] * norms_[n - 1][i] + norms_[n][i] * norms_[n][i]);
        }
    }
    for (auto& v : out) v = std::sqrt(v);
    return out;
}

double ChannelSeries::total() const {
    double s = 0.0;
    for (double v : time_norms()) s += v;
    return s;
}

AcousticExtraction extract_acoustic_potential(const FluidState& state, const PoissonSolver& solver,
                                              const PressureLaw& law, const MotionPath& path,
                                              const FaceField& extension) {
    const Grid& grid = solver.grid();
    const double eps = state.eps;
    const double rho_bar = law.reference_density;
    const Vec2 m1 = path.eval(state.time).velocity;

    AcousticExtraction out;
    ScalarField fluct(grid.nx(), grid.ny());
    for (int k = 0; k < grid.active_count(); ++k) {
        const auto [i, j] = grid.active_cell(k);
        fluct(i, j) = (state.density(i, j) - rho_bar) / eps;
    }
    FaceField w = momentum(grid, state.density, state.velocity);
    axpy(-rho_bar, extension, w);
    axpy(-eps, constant_times_scalar(grid, m1, fluct), w);
    clear_non_open(grid, w);

    HelmholtzResult split = helmholtz_project(solver, w);
    FaceField rebuilt = split.solenoidal;
    axpy(1.0, gradient(grid, split.potential), rebuilt);
    axpy(-1.0, w, rebuilt);
    out.reconstruction_error = face_norm(grid, rebuilt);
    out.state = AcousticState{std::move(fluct), std::move(split.potential), eps, state.time};
    out.shifted_momentum = std::move(w);
    out.solenoidal = std::move(split.solenoidal);
    return out;
}

double SpectralWindow::operator()(double lambda) const {
    if (lambda <= lower_start || lambda >= upper_end) return 0.0;
    if (lambda < lower_full) return smooth_step((lambda - lower_start) / (lower_full - lower_start));
    if (lambda > upper_full) return 1.0 - smooth_step((lambda - upper_full) / (upper_end - upper_full));
    return 1.0;
}

SpectralWindow SpectralWindow::standard(const SpectralDecomposition& spectrum) {
    const int k = spectrum.modes();
    if (k < 10) throw Error(ErrorCode::InvalidArgument, "spectral window needs at least 10 modes");
    SpectralWindow g;
    g.lower_full = spectrum.eigenvalue(4);
    g.lower_start = 0.5 * g.lower_full;
    g.upper_full = spectrum.eigenvalue(std::max(k / 2 - 1, 5));
    g.upper_end = std::min(1.5 * g.upper_full, spectrum.eigenvalue(k - 1));
    if (g.upper_end <= g.upper_full) g.upper_end = 1.5 * g.upper_full;
    if (!(g.lower_start > 0.0)) throw Error(ErrorCode::InvalidArgument, "spectral window touches the kernel");
    return g;
}

ScalarField radial_cutoff(const Grid& grid, double inner, double outer) {
    if (!(outer > inner) || !(inner >= 0.0)) throw Error(ErrorCode::InvalidArgument, "cutoff radii out of order");
    ScalarField chi(grid.nx(), grid.ny());
    for (int k = 0; k < grid.active_count(); ++k) {
        const auto [i, j] = grid.active_cell(k);
        const double r = grid.cell_center(i, j).norm();
        chi(i, j) = 1.0 - smooth_step((r - inner) / (outer - inner));
    }
    return chi;
}

RageResult rage_decay(const SpectralDecomposition& spectrum, const PressureLaw& law, double eps, const ScalarField& x,
                      const ScalarField& chi, const SpectralWindow& window, double horizon,
                      const RageOptions& options) {
    if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
    if (!(horizon >= 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon must be nonnegative");
    RageResult res;
    res.horizon = horizon;
    res.modes = spectrum.modes();
    res.truncation_remainder = spectrum.truncation_remainder(x);

    const Eigen::VectorXd xc = spectrum.coefficients(x);
    std::vector<int> active;
    std::vector<double> amp;
    double lambda_max = 0.0;
    for (int k = 0; k < spectrum.modes(); ++k) {
        const double g = window(spectrum.eigenvalue(k));
        if (g == 0.0 || xc[k] == 0.0) continue;
        active.push_back(k);
        amp.push_back(g * xc[k]);
        lambda_max = std::max(lambda_max, spectrum.eigenvalue(k));
    }
    if (active.empty() || horizon == 0.0) return res;

    const double c2 = law.reference_slope();
    const double bound = eps * options.quadrature_factor / std::sqrt(c2 * lambda_max);
    if (options.step > 0.0 && options.step > bound) {
        throw Error(ErrorCode::UnresolvedOscillation,
                    "quadrature step " + std::to_string(options.step) + " exceeds " + std::to_string(bound));
    }
    const double target = options.step > 0.0 ? options.step : bound;
    long n = static_cast<long>(std::ceil(horizon / target));
    n = std::max<long>(2, n + (n % 2));
    if (n > options.max_samples) {
        throw Error(ErrorCode::UnresolvedOscillation,
                    std::to_string(n) + " quadrature samples needed, limit " + std::to_string(options.max_samples));
    }
    const double dt = horizon / static_cast<double>(n);
    res.samples = n + 1;
    res.step = dt;

    const int m = static_cast<int>(active.size());
    const Eigen::VectorXd chi_packed = spectrum.pack(chi);
    Eigen::MatrixXd basis(spectrum.vectors().rows(), m);
    Eigen::VectorXd omega(m);
    for (int a = 0; a < m; ++a) {
        basis.col(a) = chi_packed.cwiseProduct(spectrum.vectors().col(active[a]));
        omega[a] = std::sqrt(c2 * spectrum.eigenvalue(active[a])) / eps;
    }
    const double area = spectrum.grid().cell_area();

    constexpr long kBatch = 128;
    double sum = 0.0;
    Eigen::MatrixXd coeff(m, 2 * kBatch);
    for (long start = 0; start <= n; start += kBatch) {
        const long count = std::min(kBatch, n + 1 - start);
        for (long b = 0; b < count; ++b) {
            const double t = static_cast<double>(start + b) * dt;
            for (int a = 0; a < m; ++a) {
                coeff(a, 2 * b) = amp[a] * std::cos(omega[a] * t);
                coeff(a, 2 * b + 1) = amp[a] * std::sin(omega[a] * t);
            }
        }
        const Eigen::MatrixXd y = basis * coeff.leftCols(2 * count);
        for (long b = 0; b < count; ++b) {
            const long idx = start + b;
            const double val = area * (y.col(2 * b).squaredNorm() + y.col(2 * b + 1).squaredNorm());
            const double weight = (idx == 0 || idx == n) ? 1.0 : (idx % 2 == 1 ? 4.0 : 2.0);
            sum += weight * val;
        }
    }
    res.value = sum * dt / 3.0;
    return res;
}

}  // namespace lowmach
