/// @file geometry.hpp
/// @brief Truncated exterior domain, obstacle motion and the solenoidal extension field.
///
/// All fields live in the fixed (obstacle-attached) frame y = x - m(t), so the
/// obstacle never moves on the grid. The computational box is [-L, L]^2 with a
/// disk of radius a at the origin removed.
#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "lowmach/fields.hpp"

namespace lowmach {

enum class CellKind : std::uint8_t { Fluid, Cut, Solid };

/// Open: both neighbours active. Wall: exactly one neighbour active (or box edge
/// next to an active cell). Dead: no active neighbour.
enum class FaceKind : std::uint8_t { Open, Wall, Dead };

class Grid {
public:
    /// Box [-L, L]^2 minus the disk |y| < a. Cells whose centre lies inside the
    /// disk are solid; active cells touching the disk are cut cells.
    static Grid exterior(int dimension, double half_extent, double radius, double h);

    /// Obstacle-free box of nx * ny cells with lower-left corner at origin.
    static Grid box(int nx, int ny, double h, Vec2 origin = {});

    /// Arbitrary solid mask (row-major, nonzero = solid). Used for tests of
    /// connectivity handling.
    static Grid from_solid_mask(int nx, int ny, double h, Vec2 origin, const std::vector<std::uint8_t>& solid);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double h() const { return h_; }
    double cell_area() const { return h_ * h_; }
    Vec2 origin() const { return origin_; }
    bool has_obstacle() const { return radius_ > 0.0; }
    double obstacle_radius() const { return radius_; }
    /// Half width of the box measured from the obstacle centre (L for exterior grids).
    double half_extent() const { return half_extent_; }

    CellKind cell_kind(int i, int j) const { return kinds_[cell_index(i, j)]; }
    bool active(int i, int j) const { return cell_kind(i, j) != CellKind::Solid; }
    bool in_range(int i, int j) const { return i >= 0 && j >= 0 && i < nx_ && j < ny_; }

    FaceKind xface_kind(int i, int j) const { return xfaces_[static_cast<std::size_t>(j) * (nx_ + 1) + i]; }
    FaceKind yface_kind(int i, int j) const { return yfaces_[static_cast<std::size_t>(j) * nx_ + i]; }
    /// Wall faces on the box edge, as opposed to walls against the obstacle.
    bool xface_on_box_edge(int i) const { return i == 0 || i == nx_; }
    bool yface_on_box_edge(int j) const { return j == 0 || j == ny_; }

    /// A node is interior when all four surrounding cells are active.
    bool node_interior(int i, int j) const;

    Vec2 cell_center(int i, int j) const { return {origin_.x + (i + 0.5) * h_, origin_.y + (j + 0.5) * h_}; }
    Vec2 xface_center(int i, int j) const { return {origin_.x + i * h_, origin_.y + (j + 0.5) * h_}; }
    Vec2 yface_center(int i, int j) const { return {origin_.x + (i + 0.5) * h_, origin_.y + j * h_}; }
    Vec2 node(int i, int j) const { return {origin_.x + i * h_, origin_.y + j * h_}; }

    /// Unit normal pointing out of the fluid for cut cells (into the obstacle)
    /// and for active cells on the box rim (outward); empty otherwise.
    std::optional<Vec2> boundary_normal(int i, int j) const;

    int count(CellKind kind) const;
    int active_count() const { return static_cast<int>(active_cells_.size()); }
    /// Packed index of an active cell, -1 for solid cells.
    int active_index(int i, int j) const { return active_index_[cell_index(i, j)]; }
    std::pair<int, int> active_cell(int k) const { return active_cells_[k]; }

    /// Number of connected components of the active cell graph (face adjacency).
    int connected_components() const;

private:
    Grid(int nx, int ny, double h, Vec2 origin, double radius, double half_extent, std::vector<CellKind> kinds);
    std::size_t cell_index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }
    void classify_faces();

    int nx_ = 0;
    int ny_ = 0;
    double h_ = 0.0;
    Vec2 origin_{};
    double radius_ = 0.0;
    double half_extent_ = 0.0;
    std::vector<CellKind> kinds_;
    std::vector<FaceKind> xfaces_;
    std::vector<FaceKind> yfaces_;
    std::vector<int> active_index_;
    std::vector<std::pair<int, int>> active_cells_;
};

struct MotionSample {
    Vec2 displacement;
    Vec2 velocity;
    Vec2 acceleration;
};

/// Obstacle translation m(t) with m(0) = 0, defined on [0, horizon].
class MotionPath {
public:
    enum class Kind { Static, Linear, Sinusoidal };

    static MotionPath stationary(double horizon);
    static MotionPath linear(Vec2 velocity, double horizon);
    /// m(t) = amplitude * sin(frequency * t).
    static MotionPath sinusoidal(Vec2 amplitude, double frequency, double horizon);

    MotionSample eval(double t) const;
    double horizon() const { return horizon_; }
    Kind kind() const { return kind_; }

private:
    MotionPath(Kind kind, Vec2 vector, double frequency, double horizon)
        : kind_(kind), vector_(vector), frequency_(frequency), horizon_(horizon) {}

    Kind kind_;
    Vec2 vector_;
    double frequency_;
    double horizon_;
};

/// One time sample of the compactly supported solenoidal field V with
/// V.n = m'(t).n on the obstacle. Built as the discrete curl of a cut-off
/// stream function, so its discrete divergence vanishes to round-off.
struct ExtensionField {
    double time = 0.0;
    double support_radius = 0.0;
    double inner_radius = 0.0;  ///< V equals m'(t) identically for |y| <= inner_radius
    FaceField value;            ///< V(t)
    FaceField time_derivative;  ///< dV/dt at fixed y

    double max_divergence(const Grid& grid) const;
    /// max over obstacle wall faces of |V.n - m'.n|.
    double max_boundary_mismatch(const Grid& grid, Vec2 obstacle_velocity) const;
};

ExtensionField build_extension_field(const Grid& grid, const MotionPath& path, double t, double support_radius);

/// Default support radius: halfway between the obstacle and the sponge layer.
double default_extension_radius(double radius, double half_extent, double sponge_width);

/// f~(y) = f(y + shift), bilinear interpolation between cell centres with
/// constant extrapolation at the box edge.
ScalarField translate(const Grid& grid, const ScalarField& f, Vec2 shift);

/// Moving-frame field -> fixed frame at displacement m.
inline ScalarField to_fixed_frame(const Grid& grid, const ScalarField& f, Vec2 m) { return translate(grid, f, m); }
inline ScalarField to_moving_frame(const Grid& grid, const ScalarField& f, Vec2 m) {
    return translate(grid, f, Vec2{-m.x, -m.y});
}

/// C^2 step: 0 for s <= 0, 1 for s >= 1, quintic in between.
double smooth_step(double s);

}  // namespace lowmach
