/// @file discretization.hpp
/// @brief Staggered-grid operators shared by the compressible and incompressible solvers.
///
/// Conventions:
///   - cell inner product: h^2 * sum over active cells;
///   - face inner product: h^2 * sum over open faces (wall faces carry boundary data);
///   - velocity gradients: normal derivatives at cell centres, shear derivatives
///     at interior nodes only. Shear stress vanishes at every other node, which
///     realizes the free-slip condition and makes the viscous force the exact
///     negative adjoint of the gradient on open faces.
#pragma once

#include <vector>

#include "lowmach/constitutive.hpp"
#include "lowmach/fields.hpp"
#include "lowmach/geometry.hpp"

namespace lowmach {

/// Values on the (nx+1) x (ny+1) grid nodes.
class NodeField {
public:
    NodeField() = default;
    NodeField(int nx, int ny) : nx_(nx), ny_(ny), data_(static_cast<std::size_t>(nx + 1) * (ny + 1), 0.0) {}

    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(j) * (nx_ + 1) + i]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(j) * (nx_ + 1) + i]; }
    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

private:
    int nx_ = 0;
    int ny_ = 0;
    std::vector<double> data_;
};

/// Staggered 2x2 tensor field: diagonal entries at cell centres, off-diagonal at nodes.
struct TensorField {
    ScalarField xx;
    ScalarField yy;
    NodeField xy;
    NodeField yx;

    TensorField() = default;
    TensorField(int nx, int ny) : xx(nx, ny), yy(nx, ny), xy(nx, ny), yx(nx, ny) {}
};

/// Velocity gradient on the staggered grid. xy = d(u_x)/dy, yx = d(u_y)/dx.
using GradientField = TensorField;

double cell_inner(const Grid& grid, const ScalarField& a, const ScalarField& b);
double face_inner(const Grid& grid, const FaceField& a, const FaceField& b);
double cell_norm(const Grid& grid, const ScalarField& a);
double face_norm(const Grid& grid, const FaceField& a);
/// h^2 * sum of |f|^q over active cells, raised to 1/q.
double cell_lq_norm(const Grid& grid, const ScalarField& f, double q);
double cell_mean(const Grid& grid, const ScalarField& f);

/// Sets wall faces to the normal component of the obstacle velocity (zero on
/// box edges) and clears dead faces. Open faces are untouched.
void apply_wall_values(const Grid& grid, FaceField& u, Vec2 obstacle_velocity);
/// Zeroes every face that is not open.
void clear_non_open(const Grid& grid, FaceField& u);

/// Discrete gradient on open faces, zero elsewhere.
FaceField gradient(const Grid& grid, const ScalarField& phi);
/// Divergence counting only open-face fluxes (homogeneous Neumann data).
ScalarField divergence_open(const Grid& grid, const FaceField& v);
/// Divergence including wall-face fluxes.
ScalarField divergence_full(const Grid& grid, const FaceField& v);

GradientField velocity_gradient(const Grid& grid, const FaceField& u);
/// Newtonian stress evaluated on the staggered layout; shear entries vanish at
/// non-interior nodes.
TensorField stress_field(const Grid& grid, const ViscosityPair& visc, const GradientField& grad);
/// Tensor divergence on open faces, zero elsewhere.
FaceField tensor_divergence(const Grid& grid, const TensorField& t);
/// h^2 * sum of T : G over cells and interior nodes.
double tensor_contract(const Grid& grid, const TensorField& t, const GradientField& g);

/// Upwind (w . grad) u on open faces with w = u - frame_velocity. Tangential
/// neighbours across a non-open face are mirrored.
FaceField advection(const Grid& grid, const FaceField& u, Vec2 frame_velocity);

/// rho u (x) u on the staggered layout with arithmetic averaging; shear entries
/// at interior nodes only.
TensorField momentum_flux(const Grid& grid, const ScalarField& rho, const FaceField& u);

/// Averages onto faces: mean of adjacent active cells.
FaceField face_average(const Grid& grid, const ScalarField& cell);

/// Sponge strength xi^3 where xi is the depth into the absorbing rim of width w.
double sponge_profile(const Grid& grid, Vec2 p, double width);

}  // namespace lowmach
