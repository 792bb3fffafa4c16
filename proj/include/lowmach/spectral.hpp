/// @file spectral.hpp
/// @brief Neumann Laplacian on active cells, its Poisson solver, the Helmholtz
/// projection, and a truncated eigendecomposition for spectral calculus.
///
/// The Laplacian A = G^T G is the negative discrete Neumann Laplacian:
/// (A w)_c = sum over open faces of (w_c - w_n) / h^2. Its quadratic form is
/// ||G w||^2, so A is symmetric, nonnegative and annihilates constants.
///
/// Eigenvectors are normalised in the cell inner product (h^2-weighted), so
/// mode coefficients and L^2 norms coincide.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <memory>

#include "lowmach/fields.hpp"
#include "lowmach/geometry.hpp"

namespace lowmach {

class NeumannLaplacian {
public:
    /// Throws disconnected-domain if the active cells do not form one component.
    explicit NeumannLaplacian(const Grid& grid);

    const Grid& grid() const { return grid_; }
    int size() const { return grid_.active_count(); }

    ScalarField apply(const ScalarField& w) const;
    /// Matrix over packed active cells.
    const Eigen::SparseMatrix<double>& matrix() const { return matrix_; }

    Eigen::VectorXd pack(const ScalarField& w) const;
    ScalarField unpack(const Eigen::VectorXd& v) const;

private:
    Grid grid_;
    Eigen::SparseMatrix<double> matrix_;
};

/// Sparse LDL^T factorisation of A with one pinned cell. Solutions are returned
/// with zero mean; right-hand sides are projected to zero mean first.
class PoissonSolver {
public:
    explicit PoissonSolver(const NeumannLaplacian& laplacian);

    const NeumannLaplacian& laplacian() const { return *laplacian_; }
    const Grid& grid() const { return laplacian_->grid(); }

    /// Solves A x = b. Throws poisson-failure if the relative residual exceeds 1e-9.
    ScalarField solve(const ScalarField& rhs) const;

private:
    std::shared_ptr<const NeumannLaplacian> laplacian_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor_;
};

struct HelmholtzResult {
    FaceField solenoidal;  ///< H(v): zero discrete divergence, zero on walls
    ScalarField potential;  ///< Theta with v = H(v) + G Theta on open faces
};

/// Orthogonal projection, in the open-face inner product, onto fields with zero
/// open divergence. Wall faces of the result are zero; wall values of v are ignored.
HelmholtzResult helmholtz_project(const PoissonSolver& solver, const FaceField& v);

class SpectralDecomposition {
public:
    /// Lowest `modes` eigenpairs of A (dense symmetric solve). Mode 0 is the
    /// normalised constant with eigenvalue 0. Throws eigensolver-failure if the
    /// solve fails or a residual exceeds 1e-8.
    static SpectralDecomposition compute(const NeumannLaplacian& laplacian, int modes);

    int modes() const { return static_cast<int>(eigenvalues_.size()); }
    const Grid& grid() const { return grid_; }
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
    double eigenvalue(int k) const { return eigenvalues_[k]; }
    /// Columns are eigenvectors over packed active cells, h^2-orthonormal.
    const Eigen::MatrixXd& vectors() const { return vectors_; }
    const Eigen::VectorXd& residuals() const { return residuals_; }

    Eigen::VectorXd coefficients(const ScalarField& w) const;
    ScalarField synthesize(const Eigen::VectorXd& coefficients) const;
    ScalarField mode(int k) const;
    /// ||w - P_K w|| in the cell norm.
    double truncation_remainder(const ScalarField& w) const;

    Eigen::VectorXd pack(const ScalarField& w) const;
    ScalarField unpack(const Eigen::VectorXd& v) const;

private:
    SpectralDecomposition(Grid grid, Eigen::VectorXd values, Eigen::MatrixXd vectors, Eigen::VectorXd residuals)
        : grid_(std::move(grid)), eigenvalues_(std::move(values)), vectors_(std::move(vectors)),
          residuals_(std::move(residuals)) {}

    Grid grid_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd vectors_;
    Eigen::VectorXd residuals_;
};

struct FractionalPowerResult {
    ScalarField value;
    double truncation_remainder = 0.0;
};

/// sum_k lambda_k^s <w, e_k> e_k over retained modes. The kernel mode passes
/// through for s = 0, is dropped for s > 0, and for s < 0 a nonzero mean
/// raises kernel-singularity.
FractionalPowerResult fractional_power_apply(const SpectralDecomposition& spectrum, double s, const ScalarField& w);

/// Block averaging from a fine exterior grid onto a coarser one sharing its
/// box. Only active fine cells and non-dead fine faces contribute.
class Restriction {
public:
    Restriction(const Grid& fine, const Grid& coarse);

    const Grid& coarse() const { return coarse_; }
    int factor() const { return factor_; }

    ScalarField restrict_cells(const ScalarField& fine, double fallback) const;
    FaceField restrict_faces(const FaceField& fine) const;

private:
    Grid fine_;
    Grid coarse_;
    int factor_ = 1;
};

}  // namespace lowmach
