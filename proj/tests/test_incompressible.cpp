#include <doctest.h>

#include <cmath>

#include "lowmach/incompressible.hpp"

using namespace lowmach;

namespace {

IncompressibleModel model(MotionPath path, double h = 1.0 / 32) {
    return {Grid::exterior(2, 2.0, 0.25, h), ViscosityPair{0.01, 0.0}, path, 1.0, 0.5};
}

// Discrete curl of a node stream function that vanishes near every wall.
FaceField curl_field(const Grid& g, Vec2 c, double radius) {
    NodeField psi(g.nx(), g.ny());
    for (int j = 0; j <= g.ny(); ++j) {
        for (int i = 0; i <= g.nx(); ++i) {
            if (!g.node_interior(i, j)) continue;
            const double q = (g.node(i, j) - c).dot(g.node(i, j) - c) / (radius * radius);
            if (q < 1) psi(i, j) = std::pow(1 - q, 3);
        }
    }
    FaceField u(g.nx(), g.ny());
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i <= g.nx(); ++i) {
            if (g.xface_kind(i, j) == FaceKind::Open) u.x(i, j) = (psi(i, j + 1) - psi(i, j)) / g.h();
        }
    }
    for (int j = 0; j <= g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            if (g.yface_kind(i, j) == FaceKind::Open) u.y(i, j) = -(psi(i + 1, j) - psi(i, j)) / g.h();
        }
    }
    return u;
}

ScalarField potential(const Grid& g) {
    ScalarField q(g.nx(), g.ny());
    for (int k = 0; k < g.active_count(); ++k) {
        const auto [i, j] = g.active_cell(k);
        const Vec2 p = g.cell_center(i, j);
        q(i, j) = std::sin(p.x) * std::cos(0.7 * p.y) + 0.3 * p.y;
    }
    return q;
}

double max_abs_diff(const FaceField& a, const FaceField& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.xdata().size(); ++k) m = std::max(m, std::abs(a.xdata()[k] - b.xdata()[k]));
    for (std::size_t k = 0; k < a.ydata().size(); ++k) m = std::max(m, std::abs(a.ydata()[k] - b.ydata()[k]));
    return m;
}

}  // namespace

TEST_CASE("initial projection fixes solenoidal fields and removes gradients") {
    const ProjectionSolver solver(model(MotionPath::stationary(1.0)));
    const Grid& g = solver.model().grid;
    const FaceField sol = curl_field(g, {0.0, 0.8}, 0.4);
    CHECK(max_abs_diff(project_initial(solver.poisson(), sol), sol) < 1e-10);

    const FaceField grad = gradient(g, potential(g));
    FaceField zero(g.nx(), g.ny());
    CHECK(max_abs_diff(project_initial(solver.poisson(), grad), zero) < 1e-10);

    FaceField mix = sol;
    axpy(1.0, grad, mix);
    const FaceField p = project_initial(solver.poisson(), mix);
    const double lhs = face_inner(g, p, p) + face_inner(g, grad, grad);
    CHECK(std::abs(lhs - face_inner(g, mix, mix)) <= 1e-8 * face_inner(g, mix, mix));
}

TEST_CASE("projection with a moving obstacle meets the wall data") {
    const ProjectionSolver solver(model(MotionPath::linear({0.1, 0.0}, 1.0)));
    const Grid& g = solver.model().grid;
    const FaceField u = project_initial(solver.poisson(), gradient(g, potential(g)), {0.1, 0.0});
    CHECK(max_divergence(g, u) < 1e-8);
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 1; i < g.nx(); ++i) {
            if (g.xface_kind(i, j) == FaceKind::Wall) REQUIRE(u.x(i, j) == doctest::Approx(0.1));
        }
    }
}

TEST_CASE("zero velocity stays zero around a resting obstacle") {
    const ProjectionSolver solver(model(MotionPath::stationary(1.0)));
    const Grid& g = solver.model().grid;
    IncompressibleState s = solver.initial_state(FaceField(g.nx(), g.ny()));
    for (int n = 0; n < 3; ++n) solver.advance(s, 0.005);
    for (double v : s.velocity.xdata()) REQUIRE(v == 0.0);
    for (double v : s.velocity.ydata()) REQUIRE(v == 0.0);
}

TEST_CASE("every step ends divergence free") {
    const ProjectionSolver solver(model(MotionPath::linear({0.1, 0.0}, 1.0)));
    const Grid& g = solver.model().grid;
    IncompressibleState s = solver.initial_state(curl_field(g, {0.0, 0.75}, 0.3));
    CHECK(max_divergence(g, s.velocity) < 1e-8);
    for (int n = 0; n < 5; ++n) {
        solver.advance(s, solver.stable_time_step(s, 0.4));
        REQUIRE(max_divergence(g, s.velocity) < 1e-8);
    }
    CHECK(s.time > 0.0);
}

TEST_CASE("reference run hits every schedule time") {
    const ProjectionSolver solver(model(MotionPath::linear({0.1, 0.0}, 0.1)));
    const Grid& g = solver.model().grid;
    std::vector<double> seen;
    const long steps = run_incompressible(solver, solver.initial_state(curl_field(g, {0.0, 0.75}, 0.3)),
                                          Schedule{0.1, 5}, DtPolicy{},
                                          [&](int, const IncompressibleState& s) { seen.push_back(s.time); });
    CHECK(steps > 0);
    REQUIRE(seen.size() == 5);
    CHECK(seen[0] == 0.0);
    CHECK(seen[4] == 0.1);
}
