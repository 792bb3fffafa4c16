#include "lowmach/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "lowmach/error.hpp"

namespace lowmach {

namespace {

std::string num(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string where(const YAML::Node& n) {
    const YAML::Mark m = n.Mark();
    if (m.line < 0) return "";
    return " (line " + std::to_string(m.line + 1) + ", column " + std::to_string(m.column + 1) + ")";
}

class Reader {
public:
    explicit Reader(std::vector<std::string>& problems) : problems_(problems) {}

    // Returns the section node after checking it is a map with only known keys.
    YAML::Node section(const YAML::Node& root, const std::string& name, const std::set<std::string>& keys) {
        YAML::Node s = root[name];
        if (!s || s.IsNull()) return YAML::Node();
        if (!s.IsMap()) {
            problems_.push_back(name + " must be a mapping" + where(s));
            return YAML::Node();
        }
        for (const auto& kv : s) {
            const std::string k = kv.first.as<std::string>();
            if (!keys.count(k)) problems_.push_back("unknown key " + name + "." + k + where(kv.first));
        }
        return s;
    }

    template <class T>
    void get(const YAML::Node& s, const std::string& section, const std::string& key, T& out) {
        if (!s) return;
        const YAML::Node n = s[key];
        if (!n) return;
        try {
            out = n.as<T>();
        } catch (const YAML::Exception&) {
            problems_.push_back(section + "." + key + " has the wrong type" + where(n));
        }
    }

    void get_vec(const YAML::Node& s, const std::string& section, const std::string& key, Vec2& out) {
        if (!s) return;
        const YAML::Node n = s[key];
        if (!n) return;
        try {
            const auto v = n.as<std::vector<double>>();
            if (v.size() != 2) throw YAML::Exception(n.Mark(), "size");
            out = {v[0], v[1]};
        } catch (const YAML::Exception&) {
            problems_.push_back(section + "." + key + " must be a list of two numbers" + where(n));
        }
    }

private:
    std::vector<std::string>& problems_;
};

bool divides(double whole, double part) {
    const double q = whole / part;
    return std::abs(q - std::round(q)) < 1e-9 * std::max(1.0, q);
}

void check_domain(std::vector<std::string>& p, const std::string& tag, double l, double a, double h) {
    if (!(l > 0.0)) p.push_back(tag + ".half_extent must be positive");
    if (!(a > 0.0)) p.push_back(tag + ".obstacle_radius must be positive");
    if (!(h > 0.0)) p.push_back(tag + ".cell_size must be positive");
    if (l > 0.0 && a > 0.0 && !(l > 4.0 * a)) p.push_back(tag + ".half_extent must exceed 4 obstacle radii");
    if (l > 0.0 && h > 0.0 && !divides(2.0 * l, h)) p.push_back(tag + ".cell_size must divide the box width");
    if (a > 0.0 && h > 0.0 && (2.0 * a / h < 4.0 || !(a > 2.0 * h))) {
        p.push_back(tag + ".cell_size too coarse for the obstacle");
    }
}

}  // namespace

std::vector<std::string> validate(const ExperimentConfig& c) {
    std::vector<std::string> p;
    const auto& g = c.geometry;
    if (g.dimension != 2) p.push_back("geometry.dimension must be 2");
    check_domain(p, "geometry", g.half_extent, g.obstacle_radius, g.cell_size);

    const auto& ph = c.physics;
    if (!(ph.gamma > 1.5)) p.push_back("gamma must exceed 3/2");
    if (!(ph.pressure_coefficient > 0.0)) p.push_back("pressure_coefficient must be positive");
    if (!(ph.shear_viscosity > 0.0)) p.push_back("shear_viscosity must be positive");
    if (!(ph.bulk_viscosity >= 0.0)) p.push_back("bulk_viscosity must be nonnegative");
    if (!(ph.reference_density > 0.0)) p.push_back("reference_density must be positive");

    const auto& m = c.motion;
    if (m.kind != "static" && m.kind != "linear" && m.kind != "sinusoidal") {
        p.push_back("motion.kind must be static, linear or sinusoidal");
    }
    if (m.kind == "sinusoidal" && !(m.frequency > 0.0)) p.push_back("motion.frequency must be positive");

    const auto& in = c.initial;
    if (!(in.pulse_width > 0.0)) p.push_back("initial.pulse_width must be positive");
    if (!(in.bound > 0.0)) p.push_back("initial.bound must be positive");
    if (std::abs(in.pulse_amplitude) > in.bound) p.push_back("initial.pulse_amplitude exceeds initial.bound");
    if (in.velocity_kind != "zero" && in.velocity_kind != "vortex_gradient" && in.velocity_kind != "random") {
        p.push_back("initial.velocity_kind must be zero, vortex_gradient or random");
    }

    const auto& n = c.numerics;
    if (!(n.cfl > 0.0 && n.cfl <= 0.4)) p.push_back("numerics.cfl must lie in (0, 0.4]");
    if (!(n.sponge_width >= 0.0)) p.push_back("numerics.sponge_width must be nonnegative");
    if (n.sponge_width >= g.half_extent - 3.0 * g.obstacle_radius) {
        p.push_back("numerics.sponge_width leaves no room for the observation window");
    }
    if (!(n.tol_div > 0.0)) p.push_back("numerics.tol_div must be positive");
    if (!(n.tol_energy > 0.0)) p.push_back("numerics.tol_energy must be positive");
    if (n.modes < 10) p.push_back("numerics.modes must be at least 10");
    if (!(n.spectral_cell_size > 0.0)) {
        p.push_back("numerics.spectral_cell_size must be positive");
    } else if (g.cell_size > 0.0) {
        if (!divides(n.spectral_cell_size, g.cell_size)) {
            p.push_back("numerics.spectral_cell_size must be a multiple of geometry.cell_size");
        }
        check_domain(p, "numerics.spectral", g.half_extent, g.obstacle_radius, n.spectral_cell_size);
    }
    if (n.extension_radius != 0.0 &&
        !(n.extension_radius > g.obstacle_radius && n.extension_radius < g.half_extent - n.sponge_width)) {
        p.push_back("numerics.extension_radius must lie between the obstacle and the sponge");
    }
    if (!(n.quadrature_factor > 0.0 && n.quadrature_factor <= 1.0)) {
        p.push_back("numerics.quadrature_factor must lie in (0, 1]");
    }
    if (!(n.norm_exponent >= 1.0)) p.push_back("numerics.norm_exponent must be at least 1");

    if (c.rage.enabled) {
        check_domain(p, "rage", c.rage.half_extent, c.rage.obstacle_radius, c.rage.cell_size);
        if (c.rage.modes < 10) p.push_back("rage.modes must be at least 10");
        if (!(c.rage.source_width > 0.0)) p.push_back("rage.source_width must be positive");
        if (!(c.rage.horizon_fraction > 0.0 && c.rage.horizon_fraction < 1.0)) {
            p.push_back("rage.horizon_fraction must lie in (0, 1)");
        }
    }

    if (c.eps.empty()) p.push_back("sweep.eps must not be empty");
    for (std::size_t k = 0; k < c.eps.size(); ++k) {
        if (!(c.eps[k] > 0.0)) p.push_back("sweep.eps entries must be positive");
        if (k > 0 && !(c.eps[k] < c.eps[k - 1])) p.push_back("sweep.eps must be strictly decreasing");
    }

    const auto& s = c.schedule;
    if (!(s.horizon >= 0.0)) p.push_back("schedule.horizon must be nonnegative");
    if (s.snapshots < 1 || (s.horizon > 0.0 && s.snapshots < 2)) {
        p.push_back("schedule.snapshots must be at least 2 for a positive horizon");
    }
    if (s.snapshot_files != "endpoints" && s.snapshot_files != "all" && s.snapshot_files != "none") {
        p.push_back("schedule.snapshot_files must be endpoints, all or none");
    }
    if (c.id.empty() || c.id.find_first_of(",/\\ \n") != std::string::npos) {
        p.push_back("run.id must be a nonempty word without separators");
    }
    return p;
}

ExperimentConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(e.mark.line + 1) + ", column " +
                                               std::to_string(e.mark.column + 1) + ": " + e.msg);
    }
    ExperimentConfig c;
    std::vector<std::string> problems;
    if (root.IsNull()) {
        // empty document: all defaults
    } else if (!root.IsMap()) {
        throw Error(ErrorCode::ParseError, "top level must be a mapping" + where(root));
    } else {
        static const std::set<std::string> sections = {"geometry", "physics", "motion",   "initial", "numerics",
                                                       "rage",     "sweep",   "schedule", "run"};
        for (const auto& kv : root) {
            const std::string k = kv.first.as<std::string>();
            if (!sections.count(k)) problems.push_back("unknown section " + k + where(kv.first));
        }
        Reader r(problems);
        auto g = r.section(root, "geometry", {"dimension", "half_extent", "obstacle_radius", "cell_size"});
        r.get(g, "geometry", "dimension", c.geometry.dimension);
        r.get(g, "geometry", "half_extent", c.geometry.half_extent);
        r.get(g, "geometry", "obstacle_radius", c.geometry.obstacle_radius);
        r.get(g, "geometry", "cell_size", c.geometry.cell_size);

        auto ph = r.section(root, "physics",
                            {"pressure_coefficient", "gamma", "shear_viscosity", "bulk_viscosity", "reference_density"});
        r.get(ph, "physics", "pressure_coefficient", c.physics.pressure_coefficient);
        r.get(ph, "physics", "gamma", c.physics.gamma);
        r.get(ph, "physics", "shear_viscosity", c.physics.shear_viscosity);
        r.get(ph, "physics", "bulk_viscosity", c.physics.bulk_viscosity);
        r.get(ph, "physics", "reference_density", c.physics.reference_density);

        auto mo = r.section(root, "motion", {"kind", "velocity", "amplitude", "frequency"});
        r.get(mo, "motion", "kind", c.motion.kind);
        r.get_vec(mo, "motion", "velocity", c.motion.velocity);
        r.get_vec(mo, "motion", "amplitude", c.motion.amplitude);
        r.get(mo, "motion", "frequency", c.motion.frequency);

        auto in = r.section(root, "initial",
                            {"pulse_amplitude", "pulse_width", "pulse_center", "velocity_kind", "vortex_strength",
                             "gradient_strength", "bound"});
        r.get(in, "initial", "pulse_amplitude", c.initial.pulse_amplitude);
        r.get(in, "initial", "pulse_width", c.initial.pulse_width);
        r.get_vec(in, "initial", "pulse_center", c.initial.pulse_center);
        r.get(in, "initial", "velocity_kind", c.initial.velocity_kind);
        r.get(in, "initial", "vortex_strength", c.initial.vortex_strength);
        r.get(in, "initial", "gradient_strength", c.initial.gradient_strength);
        r.get(in, "initial", "bound", c.initial.bound);

        auto nu = r.section(root, "numerics",
                            {"cfl", "sponge_width", "tol_div", "tol_energy", "modes", "spectral_cell_size",
                             "extension_radius", "quadrature_factor", "norm_exponent"});
        r.get(nu, "numerics", "cfl", c.numerics.cfl);
        r.get(nu, "numerics", "sponge_width", c.numerics.sponge_width);
        r.get(nu, "numerics", "tol_div", c.numerics.tol_div);
        r.get(nu, "numerics", "tol_energy", c.numerics.tol_energy);
        r.get(nu, "numerics", "modes", c.numerics.modes);
        r.get(nu, "numerics", "spectral_cell_size", c.numerics.spectral_cell_size);
        r.get(nu, "numerics", "extension_radius", c.numerics.extension_radius);
        r.get(nu, "numerics", "quadrature_factor", c.numerics.quadrature_factor);
        r.get(nu, "numerics", "norm_exponent", c.numerics.norm_exponent);

        auto ra = r.section(root, "rage",
                            {"enabled", "half_extent", "obstacle_radius", "cell_size", "modes", "source_center",
                             "source_width", "horizon_fraction"});
        r.get(ra, "rage", "enabled", c.rage.enabled);
        r.get(ra, "rage", "half_extent", c.rage.half_extent);
        r.get(ra, "rage", "obstacle_radius", c.rage.obstacle_radius);
        r.get(ra, "rage", "cell_size", c.rage.cell_size);
        r.get(ra, "rage", "modes", c.rage.modes);
        r.get_vec(ra, "rage", "source_center", c.rage.source_center);
        r.get(ra, "rage", "source_width", c.rage.source_width);
        r.get(ra, "rage", "horizon_fraction", c.rage.horizon_fraction);

        auto sw = r.section(root, "sweep", {"eps"});
        r.get(sw, "sweep", "eps", c.eps);

        auto sc = r.section(root, "schedule", {"horizon", "snapshots", "snapshot_files"});
        r.get(sc, "schedule", "horizon", c.schedule.horizon);
        r.get(sc, "schedule", "snapshots", c.schedule.snapshots);
        r.get(sc, "schedule", "snapshot_files", c.schedule.snapshot_files);

        auto ru = r.section(root, "run", {"seed", "id"});
        r.get(ru, "run", "seed", c.seed);
        r.get(ru, "run", "id", c.id);
    }
    for (auto& v : validate(c)) problems.push_back(std::move(v));
    if (!problems.empty()) {
        std::string msg;
        for (std::size_t k = 0; k < problems.size(); ++k) msg += (k ? "; " : "") + problems[k];
        throw Error(ErrorCode::ValidationError, msg);
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::MissingArtifact, "cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string canonical_text(const ExperimentConfig& c) {
    std::ostringstream o;
    auto vec = [](Vec2 v) { return "[" + num(v.x) + ", " + num(v.y) + "]"; };
    auto boolean = [](bool b) { return b ? "true" : "false"; };
    o << "geometry:\n"
      << "  dimension: " << c.geometry.dimension << "\n"
      << "  half_extent: " << num(c.geometry.half_extent) << "\n"
      << "  obstacle_radius: " << num(c.geometry.obstacle_radius) << "\n"
      << "  cell_size: " << num(c.geometry.cell_size) << "\n";
    o << "physics:\n"
      << "  pressure_coefficient: " << num(c.physics.pressure_coefficient) << "\n"
      << "  gamma: " << num(c.physics.gamma) << "\n"
      << "  shear_viscosity: " << num(c.physics.shear_viscosity) << "\n"
      << "  bulk_viscosity: " << num(c.physics.bulk_viscosity) << "\n"
      << "  reference_density: " << num(c.physics.reference_density) << "\n";
    o << "motion:\n"
      << "  kind: " << c.motion.kind << "\n"
      << "  velocity: " << vec(c.motion.velocity) << "\n"
      << "  amplitude: " << vec(c.motion.amplitude) << "\n"
      << "  frequency: " << num(c.motion.frequency) << "\n";
    o << "initial:\n"
      << "  pulse_amplitude: " << num(c.initial.pulse_amplitude) << "\n"
      << "  pulse_width: " << num(c.initial.pulse_width) << "\n"
      << "  pulse_center: " << vec(c.initial.pulse_center) << "\n"
      << "  velocity_kind: " << c.initial.velocity_kind << "\n"
      << "  vortex_strength: " << num(c.initial.vortex_strength) << "\n"
      << "  gradient_strength: " << num(c.initial.gradient_strength) << "\n"
      << "  bound: " << num(c.initial.bound) << "\n";
    o << "numerics:\n"
      << "  cfl: " << num(c.numerics.cfl) << "\n"
      << "  sponge_width: " << num(c.numerics.sponge_width) << "\n"
      << "  tol_div: " << num(c.numerics.tol_div) << "\n"
      << "  tol_energy: " << num(c.numerics.tol_energy) << "\n"
      << "  modes: " << c.numerics.modes << "\n"
      << "  spectral_cell_size: " << num(c.numerics.spectral_cell_size) << "\n"
      << "  extension_radius: " << num(c.numerics.extension_radius) << "\n"
      << "  quadrature_factor: " << num(c.numerics.quadrature_factor) << "\n"
      << "  norm_exponent: " << num(c.numerics.norm_exponent) << "\n";
    o << "rage:\n"
      << "  enabled: " << boolean(c.rage.enabled) << "\n"
      << "  half_extent: " << num(c.rage.half_extent) << "\n"
      << "  obstacle_radius: " << num(c.rage.obstacle_radius) << "\n"
      << "  cell_size: " << num(c.rage.cell_size) << "\n"
      << "  modes: " << c.rage.modes << "\n"
      << "  source_center: " << vec(c.rage.source_center) << "\n"
      << "  source_width: " << num(c.rage.source_width) << "\n"
      << "  horizon_fraction: " << num(c.rage.horizon_fraction) << "\n";
    o << "sweep:\n  eps: [";
    for (std::size_t k = 0; k < c.eps.size(); ++k) o << (k ? ", " : "") << num(c.eps[k]);
    o << "]\n";
    o << "schedule:\n"
      << "  horizon: " << num(c.schedule.horizon) << "\n"
      << "  snapshots: " << c.schedule.snapshots << "\n"
      << "  snapshot_files: " << c.schedule.snapshot_files << "\n";
    o << "run:\n"
      << "  seed: " << c.seed << "\n"
      << "  id: " << c.id << "\n";
    return o.str();
}

std::string config_hash(const ExperimentConfig& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical_text(config)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace lowmach
