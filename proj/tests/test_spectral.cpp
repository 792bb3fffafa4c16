#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "lowmach/discretization.hpp"
#include "lowmach/error.hpp"
#include "lowmach/spectral.hpp"

using namespace lowmach;

namespace {

constexpr double pi = std::numbers::pi;

ScalarField random_cells(const Grid& g, std::mt19937_64& rng) {
    std::normal_distribution<double> d;
    ScalarField f(g.nx(), g.ny());
    for (int k = 0; k < g.active_count(); ++k) {
        const auto [i, j] = g.active_cell(k);
        f(i, j) = d(rng);
    }
    return f;
}

FaceField random_faces(const Grid& g, std::mt19937_64& rng) {
    std::normal_distribution<double> d;
    FaceField u(g.nx(), g.ny());
    for (auto& v : u.xdata()) v = d(rng);
    for (auto& v : u.ydata()) v = d(rng);
    clear_non_open(g, u);
    return u;
}

double face_max(const FaceField& u) {
    double m = 0.0;
    for (double v : u.xdata()) m = std::max(m, std::abs(v));
    for (double v : u.ydata()) m = std::max(m, std::abs(v));
    return m;
}

// Sorted k^2 + l^2 over k, l >= 0 excluding (0, 0), with multiplicity.
std::vector<std::pair<double, double>> rectangle_table(double h, int count) {
    std::vector<std::pair<double, double>> t;
    for (int k = 0; k < 12; ++k) {
        for (int l = 0; l < 12; ++l) {
            if (k == 0 && l == 0) continue;
            const double exact = k * k + l * l;
            const double discrete =
                4.0 / (h * h) * (std::pow(std::sin(k * h / 2), 2) + std::pow(std::sin(l * h / 2), 2));
            t.emplace_back(discrete, exact);
        }
    }
    std::sort(t.begin(), t.end());
    t.resize(count);
    return t;
}

}  // namespace

TEST_CASE("Laplacian kills constants and is nonnegative") {
    const Grid g = Grid::exterior(2, 1.0, 0.2, 1.0 / 16);
    const NeumannLaplacian lap(g);
    const ScalarField ones(g.nx(), g.ny(), 1.0);
    const ScalarField a1 = lap.apply(ones);
    for (int k = 0; k < g.active_count(); ++k) {
        const auto [i, j] = g.active_cell(k);
        REQUIRE(a1(i, j) == 0.0);
    }
    std::mt19937_64 rng(3);
    for (int n = 0; n < 10; ++n) {
        const ScalarField w = random_cells(g, rng);
        REQUIRE(cell_inner(g, lap.apply(w), w) >= 0.0);
        // The quadratic form equals the squared gradient norm.
        const FaceField gw = gradient(g, w);
        REQUIRE(cell_inner(g, lap.apply(w), w) == doctest::Approx(face_inner(g, gw, gw)).epsilon(1e-12));
    }
}

TEST_CASE("disconnected active cells are rejected") {
    std::vector<std::uint8_t> solid(8 * 8, 0);
    for (int j = 0; j < 8; ++j) solid[j * 8 + 4] = 1;
    const Grid g = Grid::from_solid_mask(8, 8, 0.1, {}, solid);
    CHECK(g.connected_components() == 2);
    try {
        NeumannLaplacian lap(g);
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DisconnectedDomain);
    }
}

TEST_CASE("Poisson solves return zero-mean solutions with small residual") {
    const Grid g = Grid::exterior(2, 1.0, 0.2, 1.0 / 16);
    const NeumannLaplacian lap(g);
    const PoissonSolver solver(lap);
    std::mt19937_64 rng(4);
    ScalarField b = random_cells(g, rng);
    const double mean = cell_mean(g, b);
    for (int k = 0; k < g.active_count(); ++k) {
        const auto [i, j] = g.active_cell(k);
        b(i, j) -= mean;
    }
    const ScalarField x = solver.solve(b);
    CHECK(std::abs(cell_mean(g, x)) < 1e-12);
    ScalarField r = lap.apply(x);
    axpy(-1.0, b, r);
    CHECK(cell_norm(g, r) < 1e-9 * cell_norm(g, b));
}

TEST_CASE("rectangle spectrum matches the separable table") {
    const int n = 32;
    const double h = pi / n;
    const Grid g = Grid::box(n, n, h);
    const SpectralDecomposition spec = SpectralDecomposition::compute(NeumannLaplacian(g), 40);
    CHECK(spec.eigenvalue(0) == doctest::Approx(0.0).epsilon(1e-12));
    const auto table = rectangle_table(h, 20);
    for (int k = 0; k < 20; ++k) {
        const auto [discrete, exact] = table[k];
        // Exact for the five-point stencil.
        REQUIRE(std::abs(spec.eigenvalue(k + 1) - discrete) <= 1e-10 * discrete);
        // Second order against the continuum values.
        REQUIRE(std::abs(spec.eigenvalue(k + 1) - exact) <= exact * exact * h * h / 12.0 + 1e-12);
    }
    CHECK(spec.eigenvalue(1) == doctest::Approx(1.0).epsilon(h * h));
    CHECK(spec.eigenvalue(3) == doctest::Approx(2.0).epsilon(h * h));
    for (int k = 0; k < spec.modes(); ++k) REQUIRE(spec.residuals()[k] < 1e-8);
}

TEST_CASE("eigenvectors are orthonormal in the cell inner product") {
    const Grid g = Grid::exterior(2, 1.2, 0.25, 0.1);
    const SpectralDecomposition spec = SpectralDecomposition::compute(NeumannLaplacian(g), 30);
    const Eigen::MatrixXd gram = g.cell_area() * spec.vectors().transpose() * spec.vectors();
    CHECK((gram - Eigen::MatrixXd::Identity(30, 30)).cwiseAbs().maxCoeff() < 1e-10);
    const ScalarField e0 = spec.mode(0);
    const double c = e0(0, 0);
    for (int k = 0; k < g.active_count(); ++k) {
        const auto [i, j] = g.active_cell(k);
        REQUIRE(e0(i, j) == doctest::Approx(c).epsilon(1e-12));
    }
}

TEST_CASE("one mode is the normalised constant") {
    const Grid g = Grid::exterior(2, 1.2, 0.25, 0.1);
    const SpectralDecomposition spec = SpectralDecomposition::compute(NeumannLaplacian(g), 1);
    REQUIRE(spec.modes() == 1);
    CHECK(spec.eigenvalue(0) == 0.0);
    const ScalarField e0 = spec.mode(0);
    CHECK(cell_norm(g, e0) == doctest::Approx(1.0));
    const auto [i, j] = g.active_cell(5);
    CHECK(e0(i, j) == doctest::Approx(1.0 / std::sqrt(g.active_count() * g.cell_area())));
}

TEST_CASE("fractional powers") {
    const Grid g = Grid::exterior(2, 1.2, 0.25, 0.1);
    const SpectralDecomposition spec = SpectralDecomposition::compute(NeumannLaplacian(g), 40);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(40);
    c(0) = 0.0;
    c(3) = 1.5;
    c(17) = -0.4;
    const ScalarField w = spec.synthesize(c);

    const FractionalPowerResult id = fractional_power_apply(spec, 0.0, w);
    CHECK((spec.coefficients(id.value) - c).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(id.truncation_remainder < 1e-12);

    const FractionalPowerResult one = fractional_power_apply(spec, 1.0, spec.mode(7));
    CHECK((spec.coefficients(one.value) - spec.eigenvalue(7) * Eigen::VectorXd::Unit(40, 7)).cwiseAbs().maxCoeff() <
          1e-10);

    const FractionalPowerResult half = fractional_power_apply(spec, 0.5, fractional_power_apply(spec, 0.5, w).value);
    const FractionalPowerResult full = fractional_power_apply(spec, 1.0, w);
    CHECK((spec.coefficients(half.value) - spec.coefficients(full.value)).cwiseAbs().maxCoeff() < 1e-10);

    try {
        fractional_power_apply(spec, -0.5, spec.mode(0));
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::KernelSingularity);
    }
}

TEST_CASE("Helmholtz projection exact cases") {
    const Grid g = Grid::exterior(2, 1.0, 0.2, 1.0 / 16);
    const NeumannLaplacian lap(g);
    const PoissonSolver solver(lap);
    std::mt19937_64 rng(5);

    const FaceField grad = gradient(g, random_cells(g, rng));
    CHECK(face_max(helmholtz_project(solver, grad).solenoidal) < 1e-8);

    const FaceField sol = helmholtz_project(solver, random_faces(g, rng)).solenoidal;
    FaceField diff = helmholtz_project(solver, sol).solenoidal;
    axpy(-1.0, sol, diff);
    CHECK(face_max(diff) < 1e-8);
}

TEST_CASE("uniform flow in a closed square projects to nearly zero") {
    const int n = 64;
    const double h = 1.0 / n;
    const Grid g = Grid::box(n, n, h);
    const PoissonSolver solver{NeumannLaplacian(g)};
    FaceField v(n, n);
    for (auto& x : v.xdata()) x = 1.0;
    const HelmholtzResult r = helmholtz_project(solver, v);
    CHECK(face_norm(g, r.solenoidal) <= 10 * h);
}

TEST_CASE("Helmholtz projection is idempotent and orthogonal on random fields") {
    const Grid g = Grid::exterior(2, 1.0, 0.2, 1.0 / 16);
    const PoissonSolver solver{NeumannLaplacian(g)};
    std::mt19937_64 rng(6);
    for (int n = 0; n < 20; ++n) {
        const FaceField v = random_faces(g, rng);
        const HelmholtzResult r = helmholtz_project(solver, v);
        FaceField again = helmholtz_project(solver, r.solenoidal).solenoidal;
        axpy(-1.0, r.solenoidal, again);
        REQUIRE(face_norm(g, again) <= 1e-8 * face_norm(g, v));
        const FaceField gp = gradient(g, r.potential);
        REQUIRE(std::abs(face_inner(g, r.solenoidal, gp)) <= 1e-8 * face_inner(g, v, v));
        REQUIRE(std::abs(face_inner(g, r.solenoidal, r.solenoidal) + face_inner(g, gp, gp) - face_inner(g, v, v)) <=
                1e-8 * face_inner(g, v, v));
        const ScalarField div = divergence_open(g, r.solenoidal);
        REQUIRE(cell_norm(g, div) <= 1e-8 * face_norm(g, v) / g.h());
    }
}

TEST_CASE("restriction averages blocks") {
    const Grid fine = Grid::exterior(2, 2.0, 0.3, 1.0 / 32);
    const Grid coarse = Grid::exterior(2, 2.0, 0.3, 1.0 / 8);
    const Restriction r(fine, coarse);
    CHECK(r.factor() == 4);
    const ScalarField c = r.restrict_cells(ScalarField(fine.nx(), fine.ny(), 2.0), 1.0);
    for (int k = 0; k < coarse.active_count(); ++k) {
        const auto [i, j] = coarse.active_cell(k);
        REQUIRE(c(i, j) == doctest::Approx(2.0));
    }
}
