#include "lowmach/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "lowmach/error.hpp"
#include "lowmach/snapshot_io.hpp"

namespace lowmach {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string num(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::MissingArtifact, "missing " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string file_hash(const fs::path& p) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(read_file(p))));
    return buf;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
    if (!out) throw Error(ErrorCode::MissingArtifact, "cannot write " + p.string());
}

std::string snapshot_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snapshot_%04d.txt", index);
    return buf;
}

bool keep_snapshot(const ExperimentConfig& c, int index, int count) {
    if (c.schedule.snapshot_files == "none") return false;
    if (c.schedule.snapshot_files == "all") return true;
    return index == 0 || index == count - 1;
}

// Vortex patch of stream amplitude s and radius r around centre, as the curl
// of a node stream function; only open faces are set.
void add_vortex(const Grid& grid, Vec2 centre, double radius, double s, FaceField& u) {
    NodeField psi(grid.nx(), grid.ny());
    for (int j = 0; j <= grid.ny(); ++j) {
        for (int i = 0; i <= grid.nx(); ++i) {
            if (!grid.node_interior(i, j)) continue;
            const Vec2 d = grid.node(i, j) - centre;
            const double q = d.dot(d) / (radius * radius);
            if (q < 1.0) psi(i, j) = s * (1.0 - q) * (1.0 - q) * (1.0 - q);
        }
    }
    const double h = grid.h();
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i <= grid.nx(); ++i) {
            if (grid.xface_kind(i, j) == FaceKind::Open) u.x(i, j) += (psi(i, j + 1) - psi(i, j)) / h;
        }
    }
    for (int j = 0; j <= grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            if (grid.yface_kind(i, j) == FaceKind::Open) u.y(i, j) -= (psi(i + 1, j) - psi(i, j)) / h;
        }
    }
}

ScalarField gaussian(const Grid& grid, Vec2 centre, double width, double amplitude) {
    ScalarField f(grid.nx(), grid.ny());
    for (int k = 0; k < grid.active_count(); ++k) {
        const auto [i, j] = grid.active_cell(k);
        const Vec2 d = grid.cell_center(i, j) - centre;
        f(i, j) = amplitude * std::exp(-d.dot(d) / (width * width));
    }
    return f;
}

FluidState restrict_state(const Restriction& r, const FluidState& s, double rho_bar) {
    return {r.restrict_cells(s.density, rho_bar), r.restrict_faces(s.velocity), s.time, s.eps};
}

// Shared read-only inputs of every sweep member.
struct SweepContext {
    const ExperimentConfig* config = nullptr;
    std::optional<CompressibleModel> model;
    Schedule schedule;
    std::vector<double> times;
    std::vector<FaceField> reference;
    ExtensionBasis fine_basis;
    FaceField test_field;
    FaceField projected_test;
    Window window;
    std::optional<Grid> coarse;
    std::unique_ptr<Restriction> restriction;
    std::unique_ptr<PoissonSolver> coarse_solver;
    std::unique_ptr<SpectralDecomposition> coarse_spectrum;
    ExtensionBasis coarse_basis;
    FaceField mixed_test;
    std::unique_ptr<RageScenario> rage;
    fs::path directory;
};

struct MemberOutput {
    EpsSummary summary;
    std::vector<EnergyRecord> energy;
    std::vector<double> dissipation;
    std::vector<MetricsRecord> metrics;
    RageResult rage;
};

MemberOutput run_member(const SweepContext& ctx, double eps) {
    const ExperimentConfig& cfg = *ctx.config;
    const CompressibleModel& model = *ctx.model;
    const Grid& grid = model.grid;
    const double rho_bar = model.law.reference_density;
    MemberOutput out;
    out.summary.eps = eps;

    const std::string tag = format_eps(eps);
    const fs::path snap_dir = ctx.directory / ("eps_" + tag);
    fs::create_directories(snap_dir);

    UniformEstimateMonitor uniform(grid, model.law, eps, cfg.numerics.norm_exponent);
    ConvergenceMonitor convergence(grid, model.law, model.path, ctx.fine_basis, ctx.window, ctx.projected_test,
                                   ctx.test_field);
    ChannelSeries channels;
    const int count = static_cast<int>(ctx.times.size());

    RunOptions options;
    options.dt.cfl = cfg.numerics.cfl;
    options.extension_radius = cfg.numerics.extension_radius;
    options.energy_tolerance = cfg.numerics.tol_energy;

    auto observer = [&](int index, const FluidState& state, const EnergyRecord& rec) {
        out.energy.push_back(rec);
        out.dissipation.push_back(rec.lhs - kinetic_energy(grid, state.density, state.velocity) -
                                  internal_energy(grid, model.law, state.density, state.eps));
        uniform.add(state);
        convergence.add(state, ctx.reference[index], ctx.times[index]);

        const FluidState coarse = restrict_state(*ctx.restriction, state, rho_bar);
        const MotionSample motion = model.path.eval(state.time);
        const ForcingFields forcing =
            assemble_forcing(coarse, *ctx.coarse, model.law, model.visc, model.path, ctx.coarse_basis);
        channels.append(state.time, forcing_channels(*ctx.coarse_spectrum, forcing));

        const FaceField v =
            ctx.coarse_basis.empty() ? FaceField(ctx.coarse->nx(), ctx.coarse->ny()) : ctx.coarse_basis.value(motion.velocity);
        const AcousticExtraction ac = extract_acoustic_potential(coarse, *ctx.coarse_solver, model.law, model.path, v);
        const double scale = std::max(1.0, face_norm(*ctx.coarse, ac.shifted_momentum));
        out.summary.max_reconstruction_error =
            std::max(out.summary.max_reconstruction_error, ac.reconstruction_error / scale);
        out.summary.max_assembly_residual =
            std::max(out.summary.max_assembly_residual,
                     assembly_identity_residual(*ctx.coarse_solver, ac.shifted_momentum, ctx.mixed_test));
        const double c2 = model.law.reference_slope();
        const double energy = c2 * cell_inner(*ctx.coarse, ac.state.density_fluctuation, ac.state.density_fluctuation) +
                              face_inner(*ctx.coarse, gradient(*ctx.coarse, ac.state.potential),
                                         gradient(*ctx.coarse, ac.state.potential));
        out.metrics.push_back({cfg.id, eps, "acoustic_energy", 2.0, "full", state.time, energy});

        if (keep_snapshot(cfg, index, count)) write_snapshot((snap_dir / snapshot_name(index)).string(), grid, state);
    };

    FluidState initial = init_state(model, make_initial_data(cfg, grid, eps));
    RunSummary run_summary;
    try {
        run_summary = run(model, std::move(initial), ctx.schedule, options, observer);
    } catch (const Error& e) {
        throw Error(e.code(), "eps=" + tag + ": " + e.detail());
    }

    out.summary.steps = run_summary.steps;
    out.summary.mass = run_summary.mass;
    for (const auto& r : out.energy) {
        out.summary.energy_ok = out.summary.energy_ok && r.flag;
        const double margin = (r.lhs - r.rhs) / r.tolerance;
        out.summary.worst_energy_margin =
            (&r == &out.energy.front()) ? margin : std::max(out.summary.worst_energy_margin, margin);
    }
    out.summary.density_deviation = convergence.density_deviation();
    out.summary.velocity_error = convergence.velocity_error();
    out.summary.solenoidal_error = convergence.solenoidal_error();
    out.summary.residual_measure = uniform.residual_measure();
    out.summary.channels = channels.time_norms();
    out.summary.channel_total = channels.total();

    std::vector<MetricsRecord> sup = uniform.report(cfg.id);
    std::vector<MetricsRecord> conv = convergence.report(cfg.id);
    sup.insert(sup.end(), conv.begin(), conv.end());
    for (int i = 0; i < 5; ++i) {
        sup.push_back({cfg.id, eps, "forcing_channel_" + std::to_string(i + 1), 2.0, "full", {}, out.summary.channels[i]});
    }
    sup.push_back({cfg.id, eps, "forcing_channel_total", 2.0, "full", {}, out.summary.channel_total});

    if (ctx.rage) {
        const RageScenario& rs = *ctx.rage;
        RageOptions ro;
        ro.quadrature_factor = cfg.numerics.quadrature_factor;
        out.rage = rage_decay(rs.spectrum, model.law, eps, rs.source, rs.cutoff, rs.window, rs.horizon, ro);
        out.summary.rage = out.rage.value;
        sup.push_back({cfg.id, eps, "rage_decay", 2.0, "annulus", {}, out.rage.value});
    }
    out.metrics.insert(out.metrics.begin(), sup.begin(), sup.end());
    return out;
}

std::string energy_csv(const std::vector<MemberOutput>& members) {
    std::string s = "t,eps,lhs,rhs,flag,tolerance,dissipation\n";
    for (const auto& m : members) {
        for (std::size_t k = 0; k < m.energy.size(); ++k) {
            const auto& r = m.energy[k];
            s += num(r.time) + "," + num(r.eps) + "," + num(r.lhs) + "," + num(r.rhs) + "," + (r.flag ? "1" : "0") + "," +
                 num(r.tolerance) + "," + num(m.dissipation[k]) + "\n";
        }
    }
    return s;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::stringstream ss(read_file(p));
    std::string line;
    std::vector<std::vector<std::string>> rows;
    std::getline(ss, line);
    while (std::getline(ss, line)) {
        if (!line.empty()) rows.push_back(split_csv(line));
    }
    return rows;
}

double to_double(const std::string& s) {
    try {
        return std::stod(s);
    } catch (const std::logic_error&) {
        return std::nan("");
    }
}

}  // namespace

std::string format_eps(double eps) { return num(eps); }

int worker_count_from_env() {
    const char* v = std::getenv("LOWMACH_WORKERS");
    if (!v) return 1;
    const int n = std::atoi(v);
    return n > 0 ? n : 1;
}

MotionPath make_motion(const ExperimentConfig& c) {
    const double T = c.schedule.horizon;
    if (c.motion.kind == "static") return MotionPath::stationary(T);
    if (c.motion.kind == "linear") return MotionPath::linear(c.motion.velocity, T);
    return MotionPath::sinusoidal(c.motion.amplitude, c.motion.frequency, T);
}

Grid make_grid(const ExperimentConfig& c) {
    return Grid::exterior(c.geometry.dimension, c.geometry.half_extent, c.geometry.obstacle_radius, c.geometry.cell_size);
}

Grid make_spectral_grid(const ExperimentConfig& c) {
    return Grid::exterior(c.geometry.dimension, c.geometry.half_extent, c.geometry.obstacle_radius,
                          c.numerics.spectral_cell_size);
}

CompressibleModel make_model(const ExperimentConfig& c) {
    CompressibleModel m{make_grid(c),
                        PressureLaw{c.physics.pressure_coefficient, c.physics.gamma, c.physics.reference_density},
                        ViscosityPair{c.physics.shear_viscosity, c.physics.bulk_viscosity}, make_motion(c),
                        c.numerics.sponge_width};
    m.law.validate();
    m.visc.validate();
    return m;
}

IncompressibleModel make_reference_model(const ExperimentConfig& c) {
    return {make_grid(c), ViscosityPair{c.physics.shear_viscosity, c.physics.bulk_viscosity}, make_motion(c),
            c.physics.reference_density, c.numerics.sponge_width};
}

ScalarField initial_perturbation(const ExperimentConfig& c, const Grid& grid) {
    return gaussian(grid, c.initial.pulse_center, c.initial.pulse_width, c.initial.pulse_amplitude);
}

FaceField initial_velocity(const ExperimentConfig& c, const Grid& grid) {
    FaceField u(grid.nx(), grid.ny());
    const double a = c.geometry.obstacle_radius;
    if (c.initial.velocity_kind == "vortex_gradient") {
        add_vortex(grid, {0.0, 3.0 * a}, 1.2 * a, c.initial.vortex_strength, u);
        axpy(1.0, gradient(grid, gaussian(grid, {-3.0 * a, 0.0}, c.initial.pulse_width, c.initial.gradient_strength)), u);
    } else if (c.initial.velocity_kind == "random") {
        std::mt19937_64 rng(c.seed);
        std::uniform_real_distribution<double> dist(-c.initial.vortex_strength, c.initial.vortex_strength);
        for (int j = 0; j < grid.ny(); ++j) {
            for (int i = 0; i <= grid.nx(); ++i) {
                if (grid.xface_kind(i, j) == FaceKind::Open) u.x(i, j) = dist(rng);
            }
        }
        for (int j = 0; j <= grid.ny(); ++j) {
            for (int i = 0; i < grid.nx(); ++i) {
                if (grid.yface_kind(i, j) == FaceKind::Open) u.y(i, j) = dist(rng);
            }
        }
    }
    return u;
}

IllPreparedData make_initial_data(const ExperimentConfig& c, const Grid& grid, double eps) {
    return {initial_perturbation(c, grid), initial_velocity(c, grid), eps, c.initial.bound};
}

double rage_horizon(const ExperimentConfig& c) {
    const PressureLaw law{c.physics.pressure_coefficient, c.physics.gamma, c.physics.reference_density};
    const double eps_min = *std::min_element(c.eps.begin(), c.eps.end());
    return c.rage.horizon_fraction * 2.0 * (c.rage.half_extent - c.rage.obstacle_radius) * eps_min /
           std::sqrt(law.reference_slope());
}

RageScenario make_rage_scenario(const ExperimentConfig& c) {
    Grid grid = Grid::exterior(2, c.rage.half_extent, c.rage.obstacle_radius, c.rage.cell_size);
    const NeumannLaplacian lap(grid);
    SpectralDecomposition spec = SpectralDecomposition::compute(lap, std::min(c.rage.modes, lap.size()));
    ScalarField source = gaussian(grid, c.rage.source_center, c.rage.source_width, 1.0);
    ScalarField cutoff = radial_cutoff(grid, 2.0 * c.rage.obstacle_radius, 3.0 * c.rage.obstacle_radius);
    const SpectralWindow window = SpectralWindow::standard(spec);
    return {std::move(grid), std::move(spec), std::move(source), std::move(cutoff), window, rage_horizon(c)};
}

std::string spectrum_table(const ExperimentConfig& config) {
    const NeumannLaplacian lap(make_spectral_grid(config));
    const SpectralDecomposition spec = SpectralDecomposition::compute(lap, std::min(config.numerics.modes, lap.size()));
    std::string s = "k,lambda,residual\n";
    for (int k = 0; k < spec.modes(); ++k) {
        s += std::to_string(k + 1) + "," + num(spec.eigenvalue(k)) + "," + num(spec.residuals()[k]) + "\n";
    }
    return s;
}

SweepResult run_sweep(const ExperimentConfig& config, const std::string& directory, const SweepOptions& options) {
    if (auto problems = validate(config); !problems.empty()) {
        std::string msg;
        for (std::size_t k = 0; k < problems.size(); ++k) msg += (k ? "; " : "") + problems[k];
        throw Error(ErrorCode::ValidationError, msg);
    }
    auto say = [&](const std::string& m) {
        if (options.progress) options.progress(m);
    };
    const fs::path dir(directory);
    fs::create_directories(dir);
    for (const auto& entry : fs::directory_iterator(dir)) fs::remove_all(entry.path());
    write_file(dir / "INCOMPLETE", "run in progress\n");
    write_file(dir / "config.yaml", canonical_text(config));

    SweepResult result;
    result.directory = directory;
    result.config_hash = config_hash(config);

    SweepContext ctx;
    ctx.config = &config;
    ctx.directory = dir;
    ctx.model.emplace(make_model(config));
    const Grid& grid = ctx.model->grid;
    ctx.schedule = Schedule{config.schedule.horizon, config.schedule.snapshots};
    ctx.times = ctx.schedule.times();
    const bool moving = ctx.model->path.kind() != MotionPath::Kind::Static;
    const double radius = config.numerics.extension_radius > 0.0
                              ? config.numerics.extension_radius
                              : default_extension_radius(config.geometry.obstacle_radius, config.geometry.half_extent,
                                                         config.numerics.sponge_width);

    // Incompressible reference, kept in memory for the pairing with every eps.
    say("reference run");
    {
        const ProjectionSolver solver(make_reference_model(config));
        const fs::path ref_dir = dir / "reference";
        fs::create_directories(ref_dir);
        const int count = static_cast<int>(ctx.times.size());
        DtPolicy policy;
        policy.cfl = config.numerics.cfl;
        result.reference_steps = run_incompressible(
            solver, solver.initial_state(initial_velocity(config, grid)), ctx.schedule, policy,
            [&](int index, const IncompressibleState& s) {
                ctx.reference.push_back(s.velocity);
                result.reference_max_divergence = std::max(result.reference_max_divergence, max_divergence(grid, s.velocity));
                if (keep_snapshot(config, index, count)) write_snapshot((ref_dir / snapshot_name(index)).string(), grid, s);
            });
        ctx.window = Window::standard(config.geometry.obstacle_radius);
        ctx.test_field = vortex_test_field(grid, ctx.window);
        ctx.projected_test = helmholtz_project(solver.poisson(), ctx.test_field).solenoidal;
    }
    if (moving) ctx.fine_basis = ExtensionBasis(grid, radius);

    say("forcing spectrum");
    ctx.coarse.emplace(make_spectral_grid(config));
    ctx.restriction = std::make_unique<Restriction>(grid, *ctx.coarse);
    {
        const NeumannLaplacian lap(*ctx.coarse);
        ctx.coarse_solver = std::make_unique<PoissonSolver>(lap);
        ctx.coarse_spectrum = std::make_unique<SpectralDecomposition>(
            SpectralDecomposition::compute(lap, std::min(config.numerics.modes, lap.size())));
    }
    if (moving) ctx.coarse_basis = ExtensionBasis(*ctx.coarse, radius);
    {
        const Window w = Window::standard(config.geometry.obstacle_radius);
        ctx.mixed_test = vortex_test_field(*ctx.coarse, w);
        const Vec2 centre{3.0 * config.geometry.obstacle_radius, 0.0};
        axpy(1.0, gradient(*ctx.coarse, gaussian(*ctx.coarse, centre, config.geometry.obstacle_radius, 1.0)),
             ctx.mixed_test);
    }
    std::string spectrum_csv = "k,lambda,residual\n";
    for (int k = 0; k < ctx.coarse_spectrum->modes(); ++k) {
        spectrum_csv += std::to_string(k + 1) + "," + num(ctx.coarse_spectrum->eigenvalue(k)) + "," +
                        num(ctx.coarse_spectrum->residuals()[k]) + "\n";
    }
    write_file(dir / "spectrum.csv", spectrum_csv);

    if (config.rage.enabled) {
        say("local-decay spectrum");
        ctx.rage = std::make_unique<RageScenario>(make_rage_scenario(config));
    }

    const std::size_t n = config.eps.size();
    std::vector<MemberOutput> members(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    std::mutex say_mutex;
    const int workers = std::max(1, std::min<int>(options.workers > 0 ? options.workers : worker_count_from_env(),
                                                  static_cast<int>(n)));
    auto work = [&]() {
        for (std::size_t k = next++; k < n; k = next++) {
            try {
                members[k] = run_member(ctx, config.eps[k]);
                std::lock_guard<std::mutex> lock(say_mutex);
                say("eps=" + format_eps(config.eps[k]) + " done, " + std::to_string(members[k].summary.steps) + " steps");
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    write_file(dir / "energy.csv", energy_csv(members));
    std::string metrics = metrics_csv_header() + "\n";
    for (const auto& m : members) {
        for (const auto& r : m.metrics) metrics += to_csv_row(r) + "\n";
    }
    write_file(dir / "metrics.csv", metrics);

    std::string channels = "eps,channel_1,channel_2,channel_3,channel_4,channel_5,total\n";
    std::string rage = "eps,D,T,K,truncation_remainder\n";
    std::string summary =
        "eps,steps,density_deviation_over_eps,velocity_error,solenoidal_error,residual_measure,"
        "residual_measure_over_eps2,channel_total,rage_D,energy_ok,worst_energy_margin,reconstruction_error,"
        "assembly_residual,mass_initial,mass_final,mass_sponge,mass_boundary\n";
    for (const auto& m : members) {
        const EpsSummary& s = m.summary;
        channels += num(s.eps);
        for (double v : s.channels) channels += "," + num(v);
        channels += "," + num(s.channel_total) + "\n";
        if (config.rage.enabled) {
            rage += num(s.eps) + "," + num(m.rage.value) + "," + num(m.rage.horizon) + "," + std::to_string(m.rage.modes) +
                    "," + num(m.rage.truncation_remainder) + "\n";
        }
        summary += num(s.eps) + "," + std::to_string(s.steps) + "," + num(s.density_deviation) + "," +
                   num(s.velocity_error) + "," + num(s.solenoidal_error) + "," + num(s.residual_measure) + "," +
                   num(s.residual_measure / (s.eps * s.eps)) + "," + num(s.channel_total) + "," + num(s.rage) + "," +
                   (s.energy_ok ? "1" : "0") + "," + num(s.worst_energy_margin) + "," +
                   num(s.max_reconstruction_error) + "," + num(s.max_assembly_residual) + "," + num(s.mass.initial) +
                   "," + num(s.mass.final) + "," + num(s.mass.sponge) + "," + num(s.mass.boundary) + "\n";
        result.rows.push_back(s);
    }
    if (!members.empty()) result.rage_template = members.front().rage;
    write_file(dir / "channels.csv", channels);
    if (config.rage.enabled) write_file(dir / "rage.csv", rage);
    write_file(dir / "summary.csv", summary);

    json manifest;
    manifest["complete"] = true;
    manifest["config_hash"] = result.config_hash;
    manifest["run_id"] = config.id;
    manifest["eps"] = config.eps;
    manifest["snapshot_times"] = ctx.times;
    manifest["reference_steps"] = result.reference_steps;
    manifest["reference_max_divergence"] = result.reference_max_divergence;
    manifest["tolerances"] = {{"energy_relative", config.numerics.tol_energy},
                              {"divergence", config.numerics.tol_div},
                              {"reconstruction", 1e-8},
                              {"assembly_identity", 1e-8}};
    json files = json::array();
    std::vector<fs::path> paths;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name == "INCOMPLETE" || name == "manifest.json") continue;
        paths.push_back(fs::relative(entry.path(), dir));
    }
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) {
        files.push_back({{"path", p.generic_string()}, {"hash", file_hash(dir / p)}, {"bytes", fs::file_size(dir / p)}});
    }
    manifest["files"] = files;
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    fs::remove(dir / "INCOMPLETE");
    return result;
}

bool VerifyReport::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

std::string VerifyReport::to_json() const {
    json j;
    j["directory"] = directory;
    j["pass"] = pass();
    json arr = json::array();
    for (const auto& c : checks) {
        json e{{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}};
        if (!c.detail.empty()) e["detail"] = c.detail;
        arr.push_back(e);
    }
    j["checks"] = arr;
    return j.dump(2);
}

VerifyReport verify_run(const std::string& directory) {
    const fs::path dir(directory);
    if (!fs::is_directory(dir)) throw Error(ErrorCode::MissingArtifact, "no run directory " + directory);
    if (fs::exists(dir / "INCOMPLETE")) throw Error(ErrorCode::IncompleteRun, directory + " is marked incomplete");
    if (!fs::exists(dir / "manifest.json")) throw Error(ErrorCode::MissingArtifact, "manifest.json");
    json manifest;
    try {
        manifest = json::parse(read_file(dir / "manifest.json"));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MissingArtifact, std::string("manifest.json unreadable: ") + e.what());
    }
    if (!manifest.value("complete", false)) throw Error(ErrorCode::IncompleteRun, "manifest not marked complete");
    for (const auto& f : manifest.at("files")) {
        const std::string p = f.at("path").get<std::string>();
        if (!fs::exists(dir / p)) throw Error(ErrorCode::MissingArtifact, p);
    }

    VerifyReport report;
    report.directory = directory;

    {
        CheckResult c{"artifact_integrity", 0.0, 0.0, true, ""};
        for (const auto& f : manifest.at("files")) {
            const std::string p = f.at("path").get<std::string>();
            if (file_hash(dir / p) != f.at("hash").get<std::string>()) {
                c.value += 1.0;
                c.detail += (c.detail.empty() ? "" : " ") + p;
            }
        }
        c.pass = c.value == 0.0;
        report.checks.push_back(c);
    }

    const ExperimentConfig config = parse_config(read_file(dir / "config.yaml"));
    const std::string hash = config_hash(config);
    report.checks.push_back({"config_hash", 0.0, 0.0, hash == manifest.at("config_hash").get<std::string>(),
                             hash == manifest.at("config_hash").get<std::string>() ? "" : "config.yaml changed"});
    const CompressibleModel model = make_model(config);
    const Grid& grid = model.grid;
    const auto times = manifest.at("snapshot_times").get<std::vector<double>>();
    const double tol_energy = manifest.at("tolerances").at("energy_relative").get<double>();
    const double tol_div = manifest.at("tolerances").at("divergence").get<double>();

    // Energy rows keyed by (eps, time index).
    std::map<std::pair<std::string, std::string>, std::vector<double>> energy_rows;
    CheckResult inequality{"energy_inequality", -1e300, 0.0, true, ""};
    for (const auto& row : read_csv(dir / "energy.csv")) {
        if (row.size() < 7) {
            inequality.pass = false;
            inequality.detail = "short row in energy.csv";
            continue;
        }
        const double lhs = to_double(row[2]), rhs = to_double(row[3]), tol = to_double(row[5]);
        const double margin = (lhs - rhs) / tol;
        inequality.value = std::max(inequality.value, std::isnan(margin) ? 1e300 : margin);
        if (row[4] != "1" || !(lhs <= rhs + tol)) {
            inequality.pass = false;
            inequality.detail += "eps=" + row[1] + " t=" + row[0] + "; ";
        }
        energy_rows[{row[1], row[0]}] = {lhs, rhs, tol, to_double(row[6])};
    }
    inequality.tolerance = 1.0;

    CheckResult positivity{"snapshot_positivity", 1e300, 0.0, true, ""};
    CheckResult consistency{"energy_consistency", 0.0, 1e-8, true, ""};
    CheckResult wall{"obstacle_boundary_condition", 0.0, 1e-12, true, ""};
    CheckResult divergence{"reference_divergence", 0.0, tol_div, true, ""};
    for (std::size_t k = 0; k < times.size(); ++k) {
        const std::string name = snapshot_name(static_cast<int>(k));
        for (double eps : config.eps) {
            const fs::path p = dir / ("eps_" + format_eps(eps)) / name;
            if (!fs::exists(p)) continue;
            const SnapshotData s = read_snapshot(p.string());
            if (s.nx != grid.nx() || s.ny != grid.ny() || !s.has_density) {
                positivity.pass = false;
                positivity.detail += p.filename().string() + " has the wrong shape; ";
                continue;
            }
            bool finite = true;
            double lowest = 1e300;
            for (int q = 0; q < grid.active_count(); ++q) {
                const auto [i, j] = grid.active_cell(q);
                const double rho = s.density(i, j);
                if (!std::isfinite(rho)) finite = false;
                lowest = std::min(lowest, rho);
            }
            positivity.value = std::min(positivity.value, lowest);
            for (double v : s.velocity.xdata()) finite = finite && std::isfinite(v);
            for (double v : s.velocity.ydata()) finite = finite && std::isfinite(v);
            if (!finite || !(lowest > 0.0)) {
                positivity.pass = false;
                positivity.detail += "eps=" + format_eps(eps) + " " + name + "; ";
                continue;
            }

            FaceField expected = s.velocity;
            apply_wall_values(grid, expected, model.path.eval(s.time).velocity);
            for (std::size_t q = 0; q < expected.xdata().size(); ++q) {
                wall.value = std::max(wall.value, std::abs(expected.xdata()[q] - s.velocity.xdata()[q]));
            }
            for (std::size_t q = 0; q < expected.ydata().size(); ++q) {
                wall.value = std::max(wall.value, std::abs(expected.ydata()[q] - s.velocity.ydata()[q]));
            }

            const auto it = energy_rows.find({format_eps(eps), num(times[k])});
            if (it == energy_rows.end()) {
                consistency.pass = false;
                consistency.detail += "no energy row for eps=" + format_eps(eps) + " " + name + "; ";
                continue;
            }
            const auto& e = it->second;
            const double recomputed = kinetic_energy(grid, s.density, s.velocity) +
                                      internal_energy(grid, model.law, s.density, eps) + e[3];
            const double rel = std::abs(recomputed - e[0]) / std::max(1.0, std::abs(e[0]));
            consistency.value = std::max(consistency.value, std::isnan(rel) ? 1e300 : rel);
            if (!(rel <= consistency.tolerance)) consistency.detail += "eps=" + format_eps(eps) + " " + name + "; ";
            if (!(recomputed <= e[1] + e[2])) {
                inequality.pass = false;
                inequality.detail += "recomputed eps=" + format_eps(eps) + " " + name + "; ";
            }
        }
        const fs::path rp = dir / "reference" / name;
        if (fs::exists(rp)) {
            const SnapshotData s = read_snapshot(rp.string());
            FaceField u = s.velocity;
            const double d = max_divergence(grid, u);
            divergence.value = std::max(divergence.value, std::isnan(d) ? 1e300 : d);
        }
    }
    consistency.pass = consistency.pass && consistency.value <= consistency.tolerance;
    wall.pass = wall.value <= wall.tolerance;
    divergence.pass = divergence.value <= divergence.tolerance;
    report.checks.push_back(positivity);
    report.checks.push_back(consistency);
    report.checks.push_back(inequality);
    report.checks.push_back(wall);
    report.checks.push_back(divergence);

    CheckResult nonneg{"metrics_nonnegative", 0.0, 0.0, true, ""};
    for (const auto& row : read_csv(dir / "metrics.csv")) {
        const double v = row.size() == 7 ? to_double(row[6]) : std::nan("");
        if (!(v >= 0.0)) {
            nonneg.value += 1.0;
            nonneg.pass = false;
        }
    }
    report.checks.push_back(nonneg);

    CheckResult summary{"summary_identities", 0.0, 1e-8, true, ""};
    for (const auto& row : read_csv(dir / "summary.csv")) {
        if (row.size() < 13) {
            summary.pass = false;
            continue;
        }
        summary.value = std::max({summary.value, to_double(row[11]), to_double(row[12])});
        if (row[9] != "1") {
            summary.pass = false;
            summary.detail += "energy flag false at eps=" + row[0] + "; ";
        }
    }
    summary.pass = summary.pass && summary.value <= summary.tolerance;
    report.checks.push_back(summary);
    (void)tol_energy;
    return report;
}

}  // namespace lowmach
