// ASCII snapshot files: a header of "key value" lines, then one block per
// field ("field <name> <count>" followed by one value per line, row-major).
#pragma once

#include <string>

#include "lowmach/compressible.hpp"
#include "lowmach/incompressible.hpp"

namespace lowmach {

struct SnapshotData {
    int dimension = 2;
    int nx = 0;
    int ny = 0;
    double h = 0.0;
    Vec2 origin;
    double time = 0.0;
    double eps = 0.0;  ///< 0 for incompressible snapshots
    ScalarField density;
    ScalarField pressure;
    FaceField velocity;
    bool has_density = false;
    bool has_pressure = false;
};

void write_snapshot(const std::string& path, const Grid& grid, const FluidState& state);
void write_snapshot(const std::string& path, const Grid& grid, const IncompressibleState& state);

/// Throws missing-artifact if the file is absent or malformed.
SnapshotData read_snapshot(const std::string& path);

}  // namespace lowmach
