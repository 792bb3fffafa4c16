// Acceptance suite: one PASS/FAIL line per criterion, details indented below.
//
// Usage: acceptance [--out DIR] [--only N,...]
// The default scenario sweep is run fresh into DIR/default; the other shipped
// scenarios go to DIR/<id>.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lowmach/acoustics.hpp"
#include "lowmach/error.hpp"
#include "lowmach/harness.hpp"

using namespace lowmach;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kSweepBudgetSeconds = 15 * 60;
constexpr double kRageBudgetSeconds = 5 * 60;
constexpr double kDensityRatioFactor = 2.0;
constexpr double kVelocityReduction = 0.5;
constexpr double kRageReduction = 0.5;
constexpr double kUnitarityTol = 1e-10;
constexpr int kUnitaritySamples = 100;
constexpr double kHelmholtzRandomTol = 1e-8;
constexpr double kHelmholtzExactTol = 1e-10;
constexpr int kHelmholtzSamples = 100;
constexpr double kSpectrumFactor = 5.0;
constexpr int kSpectrumCells = 64;
constexpr double kResidualRatioLow = 0.25;
constexpr double kResidualRatioHigh = 4.0;
constexpr double kChannelSpread = 2.0;
constexpr double kPotentialTol = 1e-10;
constexpr double kRotationTol = 1e-10;
constexpr double kDuhamelTol = 1e-6;
constexpr double kMinOrder = 0.8;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string summary;
    std::vector<std::string> details;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string config_path(const std::string& name) {
    return std::string(LOWMACH_SOURCE_DIR) + "/configs/" + name + ".yaml";
}

struct DefaultSweep {
    SweepResult result;
    double seconds = 0.0;
    bool verified = false;
    std::string verify_detail;
};

DefaultSweep run_default(const fs::path& out) {
    DefaultSweep d;
    const ExperimentConfig c = load_config(config_path("default"));
    SweepOptions options;
    options.progress = [](const std::string& m) { std::fprintf(stderr, "[default sweep] %s\n", m.c_str()); };
    const auto t0 = Clock::now();
    d.result = run_sweep(c, (out / "default").string(), options);
    d.seconds = seconds_since(t0);
    const VerifyReport v = verify_run(d.result.directory);
    d.verified = v.pass();
    for (const auto& ch : v.checks) {
        if (!ch.pass) d.verify_detail += ch.name + " ";
    }
    return d;
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t k = 1; k < v.size(); ++k) {
        if (!(v[k] < v[k - 1])) return false;
    }
    return true;
}

Outcome density_ratio(const DefaultSweep& s) {
    Outcome o;
    const auto& rows = s.result.rows;
    const double base = rows.front().density_deviation;
    o.pass = s.seconds <= kSweepBudgetSeconds;
    double worst = 1.0;
    for (const auto& r : rows) {
        const double q = r.density_deviation / base;
        worst = std::max(worst, std::max(q, 1.0 / q));
        o.pass = o.pass && q <= kDensityRatioFactor && q >= 1.0 / kDensityRatioFactor;
        o.details.push_back(fmt("eps=%-6s max_t ||rho-rho_bar||/eps = %.6e  ratio to eps=%s: %.4f",
                                format_eps(r.eps).c_str(), r.density_deviation, format_eps(rows.front().eps).c_str(),
                                q));
    }
    o.details.push_back(fmt("sweep wall time %.1f s (budget %.0f s)", s.seconds, kSweepBudgetSeconds));
    o.summary = fmt("worst ratio factor %.4f (limit %.1f), sweep %.0f s", worst, kDensityRatioFactor, s.seconds);
    return o;
}

Outcome velocity_convergence(const DefaultSweep& s) {
    Outcome o;
    std::vector<double> v;
    for (const auto& r : s.result.rows) {
        v.push_back(r.velocity_error);
        o.details.push_back(fmt("eps=%-6s ||u-U||_L2((0,T)xK) = %.6e", format_eps(r.eps).c_str(), r.velocity_error));
    }
    const double ratio = v.back() / v.front();
    o.pass = strictly_decreasing(v) && ratio <= kVelocityReduction;
    o.summary = fmt("strictly decreasing: %s, last/first = %.4f (limit %.2f)", strictly_decreasing(v) ? "yes" : "no",
                    ratio, kVelocityReduction);
    return o;
}

Outcome local_decay(const ExperimentConfig& c, const RageScenario& scenario, double setup_seconds) {
    Outcome o;
    const PressureLaw law{c.physics.pressure_coefficient, c.physics.gamma, c.physics.reference_density};
    const auto t0 = Clock::now();
    std::vector<double> d;
    RageOptions options;
    options.quadrature_factor = c.numerics.quadrature_factor;
    for (double eps : c.eps) {
        const RageResult r =
            rage_decay(scenario.spectrum, law, eps, scenario.source, scenario.cutoff, scenario.window, scenario.horizon,
                       options);
        d.push_back(r.value);
        o.details.push_back(fmt("eps=%-6s D = %.6e  (T=%.5f, K=%d, samples=%ld, dropped=%.2e)",
                                format_eps(eps).c_str(), r.value, r.horizon, r.modes, r.samples,
                                r.truncation_remainder));
    }
    const double total = setup_seconds + seconds_since(t0);
    const double ratio = d.back() / d.front();
    o.pass = strictly_decreasing(d) && ratio <= kRageReduction && total <= kRageBudgetSeconds;
    o.details.push_back(fmt("reflection return time at eps_min: %.5f",
                            2.0 * (c.rage.half_extent - c.rage.obstacle_radius) * c.eps.back() /
                                std::sqrt(law.reference_slope())));
    o.summary = fmt("strictly decreasing: %s, last/first = %.4f (limit %.2f), %.0f s", strictly_decreasing(d) ? "yes" : "no",
                    ratio, kRageReduction, total);
    return o;
}

Outcome unitarity(const ExperimentConfig& c, const SpectralDecomposition& spec) {
    Outcome o;
    const PressureLaw law{c.physics.pressure_coefficient, c.physics.gamma, c.physics.reference_density};
    const double c2 = law.reference_slope();
    std::mt19937_64 rng(20240601);
    std::normal_distribution<double> nd;
    double worst = 0.0;
    const double eps = c.eps.back(), T = c.schedule.horizon;
    for (int n = 0; n < kUnitaritySamples; ++n) {
        ModalState m{Eigen::VectorXd(spec.modes()), Eigen::VectorXd(spec.modes()), 0.0};
        for (int k = 0; k < spec.modes(); ++k) {
            m.density[k] = nd(rng);
            m.potential[k] = k == 0 ? 0.0 : nd(rng);
        }
        // Propagate field states so the synthesis and projection are exercised too.
        const AcousticState field = from_modal(spec, m, eps);
        const double e0 = acoustic_energy(spec, c2, m);
        for (double t : {0.25 * T, T}) {
            const PropagatedState p = wave_propagate(spec, law, field, t);
            const double e = acoustic_energy(spec, c2, to_modal(spec, p.state));
            worst = std::max(worst, std::abs(e - e0) / e0);
        }
    }
    o.pass = worst <= kUnitarityTol;
    o.summary = fmt("max relative energy drift %.3e over %d states, K=%d, eps=%s, T=%s (limit %.0e)", worst,
                    kUnitaritySamples, spec.modes(), format_eps(eps).c_str(), format_eps(T).c_str(), kUnitarityTol);
    return o;
}

FaceField random_open(const Grid& g, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    FaceField u(g.nx(), g.ny());
    for (auto& v : u.xdata()) v = nd(rng);
    for (auto& v : u.ydata()) v = nd(rng);
    clear_non_open(g, u);
    return u;
}

double face_max(const FaceField& u) {
    double m = 0.0;
    for (double v : u.xdata()) m = std::max(m, std::abs(v));
    for (double v : u.ydata()) m = std::max(m, std::abs(v));
    return m;
}

Outcome helmholtz(const ExperimentConfig& c) {
    Outcome o;
    const Grid g = make_spectral_grid(c);
    const PoissonSolver solver{NeumannLaplacian(g)};
    std::mt19937_64 rng(7);
    double idem = 0.0, orth = 0.0, pyth = 0.0;
    for (int n = 0; n < kHelmholtzSamples; ++n) {
        const FaceField v = random_open(g, rng);
        const double v2 = face_inner(g, v, v);
        const HelmholtzResult r = helmholtz_project(solver, v);
        FaceField again = helmholtz_project(solver, r.solenoidal).solenoidal;
        axpy(-1.0, r.solenoidal, again);
        idem = std::max(idem, face_norm(g, again) / std::sqrt(v2));
        const FaceField gp = gradient(g, r.potential);
        orth = std::max(orth, std::abs(face_inner(g, r.solenoidal, gp)) / v2);
        pyth = std::max(pyth, std::abs(face_inner(g, r.solenoidal, r.solenoidal) + face_inner(g, gp, gp) - v2) / v2);
    }
    // Exact cases: a pure gradient and a discrete curl.
    ScalarField q(g.nx(), g.ny());
    NodeField psi(g.nx(), g.ny());
    for (int k = 0; k < g.active_count(); ++k) {
        const auto [i, j] = g.active_cell(k);
        const Vec2 p = g.cell_center(i, j);
        q(i, j) = std::sin(1.3 * p.x) * std::cos(p.y) + 0.2 * p.x * p.y;
    }
    for (int j = 0; j <= g.ny(); ++j) {
        for (int i = 0; i <= g.nx(); ++i) {
            if (g.node_interior(i, j)) psi(i, j) = std::exp(-(g.node(i, j) - Vec2{0.6, 0.4}).dot(g.node(i, j) - Vec2{0.6, 0.4}));
        }
    }
    FaceField curl(g.nx(), g.ny());
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i <= g.nx(); ++i) {
            if (g.xface_kind(i, j) == FaceKind::Open) curl.x(i, j) = (psi(i, j + 1) - psi(i, j)) / g.h();
        }
    }
    for (int j = 0; j <= g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            if (g.yface_kind(i, j) == FaceKind::Open) curl.y(i, j) = -(psi(i + 1, j) - psi(i, j)) / g.h();
        }
    }
    const FaceField grad = gradient(g, q);
    const double kill = face_max(helmholtz_project(solver, grad).solenoidal) / face_max(grad);
    FaceField fix = helmholtz_project(solver, curl).solenoidal;
    axpy(-1.0, curl, fix);
    const double keep = face_max(fix) / face_max(curl);

    o.pass = idem <= kHelmholtzRandomTol && orth <= kHelmholtzRandomTol && pyth <= kHelmholtzRandomTol &&
             kill <= kHelmholtzExactTol && keep <= kHelmholtzExactTol;
    o.summary = fmt("idempotence %.1e, orthogonality %.1e, Pythagoras %.1e, gradient kill %.1e, curl kept %.1e", idem,
                    orth, pyth, kill, keep);
    o.details.push_back(fmt("%d random fields on the %dx%d forcing grid", kHelmholtzSamples, g.nx(), g.ny()));
    return o;
}

Outcome rectangle_spectrum() {
    Outcome o;
    const int n = kSpectrumCells;
    const double h = std::numbers::pi / n;
    const Grid g = Grid::box(n, n, h);
    const SpectralDecomposition spec = SpectralDecomposition::compute(NeumannLaplacian(g), 12);
    std::vector<double> exact;
    for (int k = 0; k < 6; ++k) {
        for (int l = 0; l < 6; ++l) {
            if (k + l > 0) exact.push_back(k * k + l * l);
        }
    }
    std::sort(exact.begin(), exact.end());
    bool ok = spec.eigenvalue(0) == 0.0;
    const ScalarField e0 = spec.mode(0);
    double spread = 0.0;
    for (double v : e0.data()) spread = std::max(spread, std::abs(v - e0.data()[0]));
    ok = ok && spread == 0.0;
    int failures = 0;
    for (int k = 0; k < 10; ++k) {
        const double lam = exact[k];
        const double rel = std::abs(spec.eigenvalue(k + 1) - lam) / lam;
        const double limit = kSpectrumFactor * h * h / lam;
        const bool pass = rel <= limit;
        failures += pass ? 0 : 1;
        o.details.push_back(fmt("lambda_%d: %.10f vs %2.0f  relative error %.3e, limit %.3e  %s", k + 1,
                                spec.eigenvalue(k + 1), lam, rel, limit, pass ? "ok" : "exceeded"));
    }
    o.details.push_back(fmt("lambda_0 = %g, constant eigenvector spread %g", spec.eigenvalue(0), spread));
    o.pass = ok && failures == 0;
    o.summary = fmt("[0,pi]^2 with h=pi/%d: %d of 10 eigenvalues outside 5h^2/lambda; kernel exact: %s", n, failures,
                    ok ? "yes" : "no");
    return o;
}

struct EnergyScan {
    int snapshots = 0;
    int flagged = 0;
    double worst_margin = -1e300;
};

EnergyScan scan_energy(const std::string& dir) {
    EnergyScan s;
    std::istringstream in([&] {
        std::ifstream f(fs::path(dir) / "energy.csv");
        std::ostringstream ss;
        ss << f.rdbuf();
        return ss.str();
    }());
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        ++s.snapshots;
        const double lhs = std::stod(cells[2]), rhs = std::stod(cells[3]), tol = std::stod(cells[5]);
        if (cells[4] != "1") ++s.flagged;
        s.worst_margin = std::max(s.worst_margin, (lhs - rhs) / tol);
    }
    return s;
}

Outcome energy_flags(const DefaultSweep& s, const fs::path& out) {
    Outcome o;
    o.pass = true;
    auto add = [&](const std::string& name, const std::string& dir, double tol) {
        const EnergyScan e = scan_energy(dir);
        o.pass = o.pass && e.flagged == 0 && e.snapshots > 0 && tol == 1e-3;
        o.details.push_back(fmt("%-13s %4d snapshots, %d flagged, worst (lhs-rhs)/tol = %.3f, tol_energy=%g",
                                name.c_str(), e.snapshots, e.flagged, e.worst_margin, tol));
    };
    add("default", s.result.directory, load_config(config_path("default")).numerics.tol_energy);
    o.details.push_back(std::string("default run verify: ") + (s.verified ? "all pass" : "failed: " + s.verify_detail));
    o.pass = o.pass && s.verified;
    for (const char* name : {"static_pulse", "sinusoidal", "quick"}) {
        const ExperimentConfig c = load_config(config_path(name));
        SweepOptions options;
        const SweepResult r = run_sweep(c, (out / name).string(), options);
        add(name, r.directory, c.numerics.tol_energy);
        const VerifyReport v = verify_run(r.directory);
        o.pass = o.pass && v.pass();
        if (!v.pass()) o.details.push_back(std::string(name) + " verify failed");
    }
    o.summary = o.pass ? "flag true at every snapshot of every shipped scenario" : "flag false somewhere";
    return o;
}

Outcome residual_scaling(const DefaultSweep& s) {
    Outcome o;
    const auto& rows = s.result.rows;
    bool all_empty = true;
    for (const auto& r : rows) all_empty = all_empty && r.residual_measure == 0.0;
    o.pass = true;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const double scaled = rows[k].residual_measure / (rows[k].eps * rows[k].eps);
        o.details.push_back(fmt("eps=%-6s |{residual}| = %.6e, /eps^2 = %.6e", format_eps(rows[k].eps).c_str(),
                                rows[k].residual_measure, scaled));
        if (k > 0 && !all_empty) {
            const double prev = rows[k - 1].residual_measure / (rows[k - 1].eps * rows[k - 1].eps);
            const double ratio = scaled / prev;
            o.pass = o.pass && ratio >= kResidualRatioLow && ratio <= kResidualRatioHigh;
        }
    }
    o.summary = all_empty ? "residual set empty at every eps" : (o.pass ? "ratios within [0.25, 4]" : "ratio out of range");
    return o;
}

Outcome channel_boundedness(const DefaultSweep& s) {
    Outcome o;
    double lo = 1e300, hi = 0.0;
    for (const auto& r : s.result.rows) {
        lo = std::min(lo, r.channel_total);
        hi = std::max(hi, r.channel_total);
        o.details.push_back(fmt("eps=%-6s sum_i ||G_i|| = %.6e  [%.3e %.3e %.3e %.3e %.3e]", format_eps(r.eps).c_str(),
                                r.channel_total, r.channels[0], r.channels[1], r.channels[2], r.channels[3],
                                r.channels[4]));
    }
    o.pass = hi < kChannelSpread * lo;
    o.summary = fmt("max/min = %.4f (limit %.1f)", hi / lo, kChannelSpread);
    return o;
}

double quadrature_potential(const PressureLaw& law, double rho) {
    const int n = 20000;
    const double dz = (rho - 1.0) / n;
    double sum = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double z = 1.0 + k * dz;
        sum += ((k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0)) * law.pressure(z) / (z * z);
    }
    return rho * sum * dz / 3.0;
}

// Difference of final velocities (and densities) between runs at dt, dt/2, dt/4.
double observed_order(const std::function<std::vector<double>(double)>& solve, double dt, std::string& note) {
    const auto a = solve(dt), b = solve(dt / 2), c = solve(dt / 4);
    double e1 = 0.0, e2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        e1 += (a[k] - b[k]) * (a[k] - b[k]);
        e2 += (b[k] - c[k]) * (b[k] - c[k]);
    }
    e1 = std::sqrt(e1);
    e2 = std::sqrt(e2);
    note = fmt("differences %.4e, %.4e", e1, e2);
    return std::log2(e1 / e2);
}

Outcome oracles() {
    Outcome o;
    // Pressure potential.
    double pot = 0.0;
    for (const PressureLaw& law : {PressureLaw{1.0, 2.0, 1.0}, PressureLaw{1.7, 2.3, 1.1}, PressureLaw{0.5, 1.6, 0.9}}) {
        for (double rho : {0.2, 0.8, 1.5, 3.0, 7.0}) {
            const double q = quadrature_potential(law, rho);
            pot = std::max(pot, std::abs(law.potential(rho) - q) / std::max(1.0, std::abs(q)));
        }
    }
    // Single-mode rotation on two cells with eigenvalue exactly 1.
    const PressureLaw law{1.0, 2.0, 1.0};
    const SpectralDecomposition two = SpectralDecomposition::compute(NeumannLaplacian(Grid::box(2, 1, std::sqrt(2.0))), 2);
    double rot = 0.0;
    const ModalState m{Eigen::Vector2d(0.0, 1.0), Eigen::Vector2d(0.0, 0.0), 0.0};
    for (double t : {0.0, 0.01, std::numbers::pi * 0.1 / std::sqrt(2.0), 0.5}) {
        const ModalState s = wave_propagate(two, law, 0.1, m, t);
        rot = std::max(rot, std::abs(s.density[1] - std::cos(std::sqrt(2.0) * t / 0.1)));
    }
    // Driven oscillator with constant forcing.
    const double eps = 0.05, h = 0.6, r0 = 0.3, p0 = -0.1, c2 = 2.0, lam = two.eigenvalue(1);
    ForcingSeries f;
    for (int k = 0; k <= 5; ++k) {
        f.times.push_back(0.04 * k);
        f.coefficients.push_back(Eigen::Vector2d(0.0, h));
    }
    const auto out = duhamel_solve(two, law, eps, ModalState{Eigen::Vector2d(0.0, r0), Eigen::Vector2d(0.0, p0), 0.0}, f);
    double duh = 0.0;
    for (int k = 0; k <= 5; ++k) {
        const double t = f.times[k], w = std::sqrt(c2 * lam) / eps, rp = eps * h / c2;
        const double r = rp + (r0 - rp) * std::cos(w * t) + lam * p0 / (eps * w) * std::sin(w * t);
        const double p = p0 * std::cos(w * t) - eps * w * (r0 - rp) / lam * std::sin(w * t);
        duh = std::max({duh, std::abs(out[k].density[1] - r), std::abs(out[k].potential[1] - p)});
    }

    // Time self-convergence of both solvers on a small exterior grid.
    const Grid g = Grid::exterior(2, 1.0, 0.2, 1.0 / 16);
    const MotionPath path = MotionPath::linear({0.1, 0.0}, 0.02);
    const CompressibleModel cm{g, law, {0.01, 0.0}, path, 0.25};
    ExperimentConfig ic;
    ic.geometry = {2, 1.0, 0.2, 1.0 / 16};
    ic.initial.pulse_center = {0.5, 0.0};
    const FaceField u0 = initial_velocity(ic, g);
    const ScalarField r1 = initial_perturbation(ic, g);
    auto compressible = [&](double dt) {
        RunOptions opt;
        opt.dt.fixed = dt;
        FluidState last;
        run(cm, init_state(cm, {r1, u0, 0.2}), Schedule{0.02, 2}, opt,
            [&](int, const FluidState& s, const EnergyRecord&) { last = s; });
        std::vector<double> v = last.velocity.xdata();
        v.insert(v.end(), last.velocity.ydata().begin(), last.velocity.ydata().end());
        v.insert(v.end(), last.density.data().begin(), last.density.data().end());
        return v;
    };
    const ProjectionSolver ps({g, {0.01, 0.0}, path, 1.0, 0.25});
    auto incompressible = [&](double dt) {
        DtPolicy policy;
        policy.fixed = dt;
        IncompressibleState last;
        run_incompressible(ps, ps.initial_state(u0), Schedule{0.02, 2}, policy,
                           [&](int, const IncompressibleState& s) { last = s; });
        std::vector<double> v = last.velocity.xdata();
        v.insert(v.end(), last.velocity.ydata().begin(), last.velocity.ydata().end());
        return v;
    };
    const FluidState probe = init_state(cm, {r1, u0, 0.2});
    const double dt_c = 0.5 * stable_time_step(cm, probe, 0.4);
    const double n_c = std::ceil(0.02 / dt_c);
    std::string note_c, note_i;
    const double order_c = observed_order(compressible, 0.02 / n_c, note_c);
    const double order_i = observed_order(incompressible, 0.02 / 16, note_i);

    o.pass = pot <= kPotentialTol && rot <= kRotationTol && duh <= kDuhamelTol && order_c >= kMinOrder &&
             order_i >= kMinOrder;
    o.summary = fmt("potential %.1e, rotation %.1e, Duhamel %.1e, order %.2f / %.2f", pot, rot, duh, order_c, order_i);
    o.details.push_back(fmt("compressible time order %.3f (%s)", order_c, note_c.c_str()));
    o.details.push_back(fmt("incompressible time order %.3f (%s)", order_i, note_i.c_str()));
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::string out = "acceptance_runs";
    std::vector<int> only;
    app.add_option("--out", out, "Directory for acceptance runs");
    app.add_option("--only", only, "Run only these criteria")->delimiter(',');
    CLI11_PARSE(app, argc, argv);
    const std::set<int> selected(only.begin(), only.end());
    auto wanted = [&](std::initializer_list<int> ids) {
        if (selected.empty()) return true;
        return std::any_of(ids.begin(), ids.end(), [&](int i) { return selected.count(i) > 0; });
    };

    const fs::path dir(out);
    fs::create_directories(dir);
    const ExperimentConfig config = load_config(config_path("default"));

    std::vector<std::pair<int, Outcome>> results;
    auto guarded = [&](int id, const std::function<Outcome()>& fn) {
        if (!selected.empty() && !selected.count(id)) return;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.summary = std::string("error: ") + e.what();
        }
        std::printf("criterion %2d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.summary.c_str());
        for (const auto& d : o.details) std::printf("    %s\n", d.c_str());
        std::fflush(stdout);
        results.emplace_back(id, o);
    };

    std::optional<DefaultSweep> sweep;
    std::string sweep_error;
    if (wanted({1, 2, 7, 8, 9})) {
        try {
            sweep = run_default(dir);
        } catch (const std::exception& e) {
            sweep_error = e.what();
        }
    }
    auto need_sweep = [&]() -> const DefaultSweep& {
        if (!sweep) throw std::runtime_error("default sweep failed: " + sweep_error);
        return *sweep;
    };

    std::optional<RageScenario> rage;
    double rage_setup = 0.0;
    if (wanted({3, 4})) {
        const auto t0 = Clock::now();
        rage.emplace(make_rage_scenario(config));
        rage_setup = seconds_since(t0);
    }

    guarded(1, [&] { return density_ratio(need_sweep()); });
    guarded(2, [&] { return velocity_convergence(need_sweep()); });
    guarded(3, [&] { return local_decay(config, *rage, rage_setup); });
    guarded(4, [&] { return unitarity(config, rage->spectrum); });
    guarded(5, [&] { return helmholtz(config); });
    guarded(6, [&] { return rectangle_spectrum(); });
    guarded(7, [&] { return energy_flags(need_sweep(), dir); });
    guarded(8, [&] { return residual_scaling(need_sweep()); });
    guarded(9, [&] { return channel_boundedness(need_sweep()); });
    guarded(10, [&] { return oracles(); });

    const int passed = static_cast<int>(std::count_if(results.begin(), results.end(), [](const auto& r) { return r.second.pass; }));
    std::printf("%d of %zu criteria passed\n", passed, results.size());
    return passed == static_cast<int>(results.size()) ? 0 : 1;
}
