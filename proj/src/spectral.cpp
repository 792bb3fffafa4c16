#include "lowmach/spectral.hpp"

#include <lapacke.h>

#include <cmath>
#include <string>
#include <vector>

#include "lowmach/discretization.hpp"
#include "lowmach/error.hpp"

namespace lowmach {

NeumannLaplacian::NeumannLaplacian(const Grid& grid) : grid_(grid) {
    const int components = grid_.connected_components();
    if (components != 1) {
        throw Error(ErrorCode::DisconnectedDomain,
                    "active cells form " + std::to_string(components) + " components");
    }
    const int n = grid_.active_count();
    const double w = 1.0 / grid_.cell_area();
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(n) * 5);
    for (int k = 0; k < n; ++k) {
        const auto [i, j] = grid_.active_cell(k);
        double diag = 0.0;
        auto link = [&](bool open, int ni, int nj) {
            if (!open) return;
            diag += w;
            entries.emplace_back(k, grid_.active_index(ni, nj), -w);
        };
        link(grid_.xface_kind(i, j) == FaceKind::Open, i - 1, j);
        link(grid_.xface_kind(i + 1, j) == FaceKind::Open, i + 1, j);
        link(grid_.yface_kind(i, j) == FaceKind::Open, i, j - 1);
        link(grid_.yface_kind(i, j + 1) == FaceKind::Open, i, j + 1);
        entries.emplace_back(k, k, diag);
    }
    matrix_.resize(n, n);
    matrix_.setFromTriplets(entries.begin(), entries.end());
    matrix_.makeCompressed();
}

ScalarField NeumannLaplacian::apply(const ScalarField& w) const {
    // Summed as differences so that constants map to exactly zero.
    const double inv_h2 = 1.0 / grid_.cell_area();
    ScalarField out(grid_.nx(), grid_.ny());
    for (int k = 0; k < grid_.active_count(); ++k) {
        const auto [i, j] = grid_.active_cell(k);
        const double c = w(i, j);
        double s = 0.0;
        if (grid_.xface_kind(i, j) == FaceKind::Open) s += c - w(i - 1, j);
        if (grid_.xface_kind(i + 1, j) == FaceKind::Open) s += c - w(i + 1, j);
        if (grid_.yface_kind(i, j) == FaceKind::Open) s += c - w(i, j - 1);
        if (grid_.yface_kind(i, j + 1) == FaceKind::Open) s += c - w(i, j + 1);
        out(i, j) = s * inv_h2;
    }
    return out;
}

Eigen::VectorXd NeumannLaplacian::pack(const ScalarField& w) const {
    Eigen::VectorXd v(size());
    for (int k = 0; k < size(); ++k) {
        const auto [i, j] = grid_.active_cell(k);
        v[k] = w(i, j);
    }
    return v;
}

ScalarField NeumannLaplacian::unpack(const Eigen::VectorXd& v) const {
    ScalarField w(grid_.nx(), grid_.ny());
    for (int k = 0; k < size(); ++k) {
        const auto [i, j] = grid_.active_cell(k);
        w(i, j) = v[k];
    }
    return w;
}

PoissonSolver::PoissonSolver(const NeumannLaplacian& laplacian)
    : laplacian_(std::make_shared<const NeumannLaplacian>(laplacian)) {
    Eigen::SparseMatrix<double> pinned = laplacian_->matrix();
    pinned.coeffRef(0, 0) += 1.0 / laplacian_->grid().cell_area();
    factor_.compute(pinned);
    if (factor_.info() != Eigen::Success) throw Error(ErrorCode::PoissonFailure, "factorisation failed");
}

ScalarField PoissonSolver::solve(const ScalarField& rhs) const {
    Eigen::VectorXd b = laplacian_->pack(rhs);
    b.array() -= b.mean();
    Eigen::VectorXd x = factor_.solve(b);
    if (factor_.info() != Eigen::Success) throw Error(ErrorCode::PoissonFailure, "back substitution failed");
    x.array() -= x.mean();
    const double bnorm = b.norm();
    const double res = (laplacian_->matrix() * x - b).norm();
    const double scale = bnorm + 1e-300;
    if (!std::isfinite(res) || res > 1e-9 * scale + 1e-12) {
        throw Error(ErrorCode::PoissonFailure, "relative residual " + std::to_string(res / scale));
    }
    return laplacian_->unpack(x);
}

HelmholtzResult helmholtz_project(const PoissonSolver& solver, const FaceField& v) {
    const Grid& grid = solver.grid();
    ScalarField rhs = divergence_open(grid, v);
    for (auto& x : rhs.data()) x = -x;
    HelmholtzResult out;
    out.potential = solver.solve(rhs);
    out.solenoidal = v;
    axpy(-1.0, gradient(grid, out.potential), out.solenoidal);
    clear_non_open(grid, out.solenoidal);
    return out;
}

SpectralDecomposition SpectralDecomposition::compute(const NeumannLaplacian& laplacian, int modes) {
    const int n = laplacian.size();
    if (modes < 1 || modes > n) {
        throw Error(ErrorCode::InvalidArgument,
                    "mode count " + std::to_string(modes) + " outside [1, " + std::to_string(n) + "]");
    }
    Eigen::MatrixXd dense = Eigen::MatrixXd(laplacian.matrix());
    Eigen::VectorXd w(n);
    Eigen::MatrixXd z(n, modes);
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(modes));
    lapack_int found = 0;
    const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', n, dense.data(), n, 0.0, 0.0, 1, modes,
                                           0.0, &found, w.data(), z.data(), n, support.data());
    if (info != 0 || found != modes) {
        throw Error(ErrorCode::EigensolverFailure, "dsyevr info=" + std::to_string(info));
    }
    const double h = laplacian.grid().h();
    Eigen::VectorXd values = w.head(modes);
    Eigen::MatrixXd vectors = z / h;
    values[0] = 0.0;
    vectors.col(0).setConstant(1.0 / (h * std::sqrt(static_cast<double>(n))));

    Eigen::VectorXd residuals(modes);
    for (int k = 0; k < modes; ++k) {
        const Eigen::VectorXd r = laplacian.matrix() * vectors.col(k) - values[k] * vectors.col(k);
        residuals[k] = r.norm() / vectors.col(k).norm();
        if (!(residuals[k] <= 1e-8)) {
            throw Error(ErrorCode::EigensolverFailure,
                        "mode " + std::to_string(k) + " residual " + std::to_string(residuals[k]));
        }
    }
    return SpectralDecomposition(laplacian.grid(), std::move(values), std::move(vectors), std::move(residuals));
}

Eigen::VectorXd SpectralDecomposition::pack(const ScalarField& w) const {
    Eigen::VectorXd v(grid_.active_count());
    for (int k = 0; k < grid_.active_count(); ++k) {
        const auto [i, j] = grid_.active_cell(k);
        v[k] = w(i, j);
    }
    return v;
}

ScalarField SpectralDecomposition::unpack(const Eigen::VectorXd& v) const {
    ScalarField w(grid_.nx(), grid_.ny());
    for (int k = 0; k < grid_.active_count(); ++k) {
        const auto [i, j] = grid_.active_cell(k);
        w(i, j) = v[k];
    }
    return w;
}

Eigen::VectorXd SpectralDecomposition::coefficients(const ScalarField& w) const {
    return grid_.cell_area() * (vectors_.transpose() * pack(w));
}

ScalarField SpectralDecomposition::synthesize(const Eigen::VectorXd& coefficients) const {
    return unpack(vectors_ * coefficients);
}

ScalarField SpectralDecomposition::mode(int k) const { return unpack(vectors_.col(k)); }

double SpectralDecomposition::truncation_remainder(const ScalarField& w) const {
    const Eigen::VectorXd packed = pack(w);
    const Eigen::VectorXd rest = packed - vectors_ * (grid_.cell_area() * (vectors_.transpose() * packed));
    return grid_.h() * rest.norm();
}

FractionalPowerResult fractional_power_apply(const SpectralDecomposition& spectrum, double s, const ScalarField& w) {
    Eigen::VectorXd c = spectrum.coefficients(w);
    const double kernel_tol = 1e-12 * (1.0 + c.norm());
    if (s < 0.0 && std::abs(c[0]) > kernel_tol) {
        throw Error(ErrorCode::KernelSingularity, "negative power of a field with nonzero mean");
    }
    for (int k = 0; k < spectrum.modes(); ++k) {
        const double lambda = spectrum.eigenvalue(k);
        if (k == 0) {
            if (s != 0.0) c[k] = 0.0;
            continue;
        }
        c[k] *= std::pow(lambda, s);
    }
    return {spectrum.synthesize(c), spectrum.truncation_remainder(w)};
}

Restriction::Restriction(const Grid& fine, const Grid& coarse) : fine_(fine), coarse_(coarse) {
    const double ratio = coarse.h() / fine.h();
    factor_ = static_cast<int>(std::lround(ratio));
    if (factor_ < 1 || std::abs(ratio - factor_) > 1e-9 || coarse.nx() * factor_ != fine.nx() ||
        coarse.ny() * factor_ != fine.ny()) {
        throw Error(ErrorCode::InvalidArgument, "coarse grid must be an integer coarsening of the fine grid");
    }
}

ScalarField Restriction::restrict_cells(const ScalarField& fine, double fallback) const {
    ScalarField out(coarse_.nx(), coarse_.ny());
    for (int j = 0; j < coarse_.ny(); ++j) {
        for (int i = 0; i < coarse_.nx(); ++i) {
            if (!coarse_.active(i, j)) continue;
            double sum = 0.0;
            int count = 0;
            for (int jj = j * factor_; jj < (j + 1) * factor_; ++jj) {
                for (int ii = i * factor_; ii < (i + 1) * factor_; ++ii) {
                    if (!fine_.active(ii, jj)) continue;
                    sum += fine(ii, jj);
                    ++count;
                }
            }
            out(i, j) = count > 0 ? sum / count : fallback;
        }
    }
    return out;
}

FaceField Restriction::restrict_faces(const FaceField& fine) const {
    FaceField out(coarse_.nx(), coarse_.ny());
    for (int j = 0; j < coarse_.ny(); ++j) {
        for (int i = 0; i <= coarse_.nx(); ++i) {
            if (coarse_.xface_kind(i, j) == FaceKind::Dead) continue;
            double sum = 0.0;
            int count = 0;
            for (int jj = j * factor_; jj < (j + 1) * factor_; ++jj) {
                if (fine_.xface_kind(i * factor_, jj) == FaceKind::Dead) continue;
                sum += fine.x(i * factor_, jj);
                ++count;
            }
            if (count > 0) out.x(i, j) = sum / count;
        }
    }
    for (int j = 0; j <= coarse_.ny(); ++j) {
        for (int i = 0; i < coarse_.nx(); ++i) {
            if (coarse_.yface_kind(i, j) == FaceKind::Dead) continue;
            double sum = 0.0;
            int count = 0;
            for (int ii = i * factor_; ii < (i + 1) * factor_; ++ii) {
                if (fine_.yface_kind(ii, j * factor_) == FaceKind::Dead) continue;
                sum += fine.y(ii, j * factor_);
                ++count;
            }
            if (count > 0) out.y(i, j) = sum / count;
        }
    }
    return out;
}

}  // namespace lowmach
