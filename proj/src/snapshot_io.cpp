#include "lowmach/snapshot_io.hpp"

#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include "lowmach/error.hpp"

namespace lowmach {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open_for_write(const std::string& path) {
    File f(std::fopen(path.c_str(), "w"));
    if (!f) throw Error(ErrorCode::MissingArtifact, "cannot write " + path);
    return f;
}

void header(std::FILE* f, const Grid& grid, double time, double eps) {
    std::fprintf(f, "lowmach-snapshot 1\n");
    std::fprintf(f, "dimension 2\n");
    std::fprintf(f, "cells %d %d\n", grid.nx(), grid.ny());
    std::fprintf(f, "h %.17g\n", grid.h());
    std::fprintf(f, "origin %.17g %.17g\n", grid.origin().x, grid.origin().y);
    std::fprintf(f, "time %.17g\n", time);
    std::fprintf(f, "eps %.17g\n", eps);
}

void block(std::FILE* f, const char* name, const std::vector<double>& values) {
    std::fprintf(f, "field %s %zu\n", name, values.size());
    for (double v : values) std::fprintf(f, "%.17g\n", v);
}

void finish(File f, const std::string& path) {
    if (std::fflush(f.get()) != 0 || std::ferror(f.get())) throw Error(ErrorCode::MissingArtifact, "write failed: " + path);
}

[[noreturn]] void malformed(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::MissingArtifact, path + " is malformed: " + what);
}

}  // namespace

void write_snapshot(const std::string& path, const Grid& grid, const FluidState& state) {
    File f = open_for_write(path);
    header(f.get(), grid, state.time, state.eps);
    block(f.get(), "density", state.density.data());
    block(f.get(), "velocity_x", state.velocity.xdata());
    block(f.get(), "velocity_y", state.velocity.ydata());
    finish(std::move(f), path);
}

void write_snapshot(const std::string& path, const Grid& grid, const IncompressibleState& state) {
    File f = open_for_write(path);
    header(f.get(), grid, state.time, 0.0);
    block(f.get(), "pressure", state.pressure.data());
    block(f.get(), "velocity_x", state.velocity.xdata());
    block(f.get(), "velocity_y", state.velocity.ydata());
    finish(std::move(f), path);
}

SnapshotData read_snapshot(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::MissingArtifact, "missing snapshot " + path);
    SnapshotData s;
    std::string key;
    int version = 0;
    if (!(in >> key >> version) || key != "lowmach-snapshot") malformed(path, "bad magic");
    if (!(in >> key >> s.dimension) || key != "dimension") malformed(path, "dimension");
    if (!(in >> key >> s.nx >> s.ny) || key != "cells" || s.nx <= 0 || s.ny <= 0) malformed(path, "cells");
    if (!(in >> key >> s.h) || key != "h") malformed(path, "h");
    if (!(in >> key >> s.origin.x >> s.origin.y) || key != "origin") malformed(path, "origin");
    if (!(in >> key >> s.time) || key != "time") malformed(path, "time");
    if (!(in >> key >> s.eps) || key != "eps") malformed(path, "eps");
    s.velocity = FaceField(s.nx, s.ny);
    std::string name;
    std::size_t count = 0;
    int blocks = 0;
    while (in >> key) {
        if (key != "field" || !(in >> name >> count)) malformed(path, "field header");
        std::vector<double>* target = nullptr;
        if (name == "density") {
            s.density = ScalarField(s.nx, s.ny);
            s.has_density = true;
            target = &s.density.data();
        } else if (name == "pressure") {
            s.pressure = ScalarField(s.nx, s.ny);
            s.has_pressure = true;
            target = &s.pressure.data();
        } else if (name == "velocity_x") {
            target = &s.velocity.xdata();
        } else if (name == "velocity_y") {
            target = &s.velocity.ydata();
        } else {
            malformed(path, "unknown field " + name);
        }
        if (count != target->size()) malformed(path, "field " + name + " has the wrong size");
        for (double& v : *target) {
            std::string tok;
            if (!(in >> tok)) malformed(path, "truncated field " + name);
            try {
                std::size_t used = 0;
                v = std::stod(tok, &used);
                if (used != tok.size()) malformed(path, "bad value in " + name);
            } catch (const std::logic_error&) {
                malformed(path, "bad value in " + name);
            }
        }
        ++blocks;
    }
    if (blocks != 3) malformed(path, "expected three fields");
    return s;
}

}  // namespace lowmach
