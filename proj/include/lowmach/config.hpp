// Experiment configuration: YAML input, validation, canonical text and hash.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lowmach/fields.hpp"

namespace lowmach {

struct GeometryConfig {
    int dimension = 2;
    double half_extent = 2.0;
    double obstacle_radius = 0.25;
    double cell_size = 1.0 / 128.0;

    friend bool operator==(const GeometryConfig&, const GeometryConfig&) = default;
};

struct PhysicsConfig {
    double pressure_coefficient = 1.0;
    double gamma = 2.0;
    double shear_viscosity = 0.01;
    double bulk_viscosity = 0.0;
    double reference_density = 1.0;

    friend bool operator==(const PhysicsConfig&, const PhysicsConfig&) = default;
};

struct MotionConfig {
    std::string kind = "linear";  ///< static | linear | sinusoidal
    Vec2 velocity{0.1, 0.0};
    Vec2 amplitude{0.0, 0.0};
    double frequency = 0.0;

    friend bool operator==(const MotionConfig&, const MotionConfig&) = default;
};

struct InitialConfig {
    double pulse_amplitude = 1.0;
    double pulse_width = 0.2;
    Vec2 pulse_center{0.75, 0.0};
    std::string velocity_kind = "vortex_gradient";  ///< zero | vortex_gradient | random
    double vortex_strength = 0.02;
    double gradient_strength = 0.005;
    double bound = 10.0;

    friend bool operator==(const InitialConfig&, const InitialConfig&) = default;
};

struct NumericsConfig {
    double cfl = 0.4;
    double sponge_width = 0.5;
    double tol_div = 1e-8;
    double tol_energy = 1e-3;
    int modes = 2000;
    double spectral_cell_size = 1.0 / 16.0;
    double extension_radius = 0.0;  ///< 0 selects the default
    double quadrature_factor = 0.5;
    double norm_exponent = 2.0;

    friend bool operator==(const NumericsConfig&, const NumericsConfig&) = default;
};

/// Large-domain scenario for the local-decay functional.
struct RageConfig {
    bool enabled = true;
    double half_extent = 4.0;
    double obstacle_radius = 0.3;
    double cell_size = 0.125;
    int modes = 2000;
    Vec2 source_center{0.6, 0.0};
    double source_width = 0.25;
    double horizon_fraction = 0.75;  ///< of the reflection-return time at the smallest eps

    friend bool operator==(const RageConfig&, const RageConfig&) = default;
};

struct ScheduleConfig {
    double horizon = 0.5;
    int snapshots = 51;
    std::string snapshot_files = "endpoints";  ///< endpoints | all | none

    friend bool operator==(const ScheduleConfig&, const ScheduleConfig&) = default;
};

struct ExperimentConfig {
    GeometryConfig geometry;
    PhysicsConfig physics;
    MotionConfig motion;
    InitialConfig initial;
    NumericsConfig numerics;
    RageConfig rage;
    std::vector<double> eps{0.2, 0.1, 0.05, 0.025};
    ScheduleConfig schedule;
    std::uint64_t seed = 0;
    std::string id = "default";

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses YAML text. Missing keys take defaults. Throws parse-error (with line
/// and column) for malformed text and validation-error listing every violation.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Every failed invariant, empty when the config is valid.
std::vector<std::string> validate(const ExperimentConfig& config);

/// Canonical text: fixed key order, every key present, shortest round-trip numbers.
std::string canonical_text(const ExperimentConfig& config);

/// FNV-1a 64 of the canonical text, 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

}  // namespace lowmach
