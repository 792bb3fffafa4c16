#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lowmach/discretization.hpp"
#include "lowmach/error.hpp"
#include "lowmach/geometry.hpp"

using namespace lowmach;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("grid rejects an obstacle narrower than four cells") {
    CHECK(code_of([] { Grid::exterior(2, 1.0, 0.2, 0.5); }) == ErrorCode::GeometryTooCoarse);
}

TEST_CASE("grid rejects a missing obstacle and other dimensions") {
    CHECK(code_of([] { Grid::exterior(2, 2.0, 0.0, 1.0 / 64); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { Grid::exterior(3, 2.0, 0.25, 1.0 / 64); }) == ErrorCode::UnsupportedDimension);
}

TEST_CASE("solid cells are exactly those with centre inside the disk") {
    const double L = 2.0, a = 0.25, h = 1.0 / 64;
    const Grid g = Grid::exterior(2, L, a, h);
    const int n = static_cast<int>(std::lround(2 * L / h));
    int inside = 0;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const double x = -L + (i + 0.5) * h, y = -L + (j + 0.5) * h;
            if (x * x + y * y < a * a) ++inside;
        }
    }
    CHECK(g.count(CellKind::Solid) == inside);
    CHECK(std::abs(inside - std::numbers::pi * a * a / (h * h)) < 0.03 * inside);
    CHECK(g.connected_components() == 1);
    CHECK(g.count(CellKind::Cut) > 0);
}

TEST_CASE("faces between two active cells are open, one active cell makes a wall") {
    const Grid g = Grid::exterior(2, 1.0, 0.2, 1.0 / 16);
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i <= g.nx(); ++i) {
            const bool left = i > 0 && g.active(i - 1, j), right = i < g.nx() && g.active(i, j);
            const FaceKind expected = left && right ? FaceKind::Open : (left || right ? FaceKind::Wall : FaceKind::Dead);
            REQUIRE(g.xface_kind(i, j) == expected);
        }
    }
}

TEST_CASE("motion paths") {
    const MotionPath lin = MotionPath::linear({0.1, 0.0}, 1.0);
    const MotionSample s0 = lin.eval(0.0);
    CHECK(s0.displacement == Vec2{0, 0});
    CHECK(s0.velocity == Vec2{0.1, 0});
    CHECK(s0.acceleration == Vec2{0, 0});

    const MotionPath sine = MotionPath::sinusoidal({1.0, 0.0}, 1.0, 2.0);
    const MotionSample s = sine.eval(std::numbers::pi / 2);
    CHECK(s.displacement.x == doctest::Approx(1.0));
    CHECK(s.velocity.x == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(s.acceleration.x == doctest::Approx(-1.0));

    CHECK(code_of([&] { lin.eval(1.1); }) == ErrorCode::OutOfHorizon);
    CHECK(code_of([&] { sine.eval(2.1); }) == ErrorCode::OutOfHorizon);
}

TEST_CASE("extension field vanishes for a resting obstacle") {
    const Grid g = Grid::exterior(2, 2.0, 0.25, 1.0 / 32);
    const ExtensionField v = build_extension_field(g, MotionPath::stationary(1.0), 0.5, 1.0);
    for (double x : v.value.xdata()) REQUIRE(x == 0.0);
    for (double y : v.value.ydata()) REQUIRE(y == 0.0);
}

TEST_CASE("extension field is divergence free, matches the wall and has compact support") {
    const double h = 1.0 / 64;
    const Grid g = Grid::exterior(2, 2.0, 0.25, h);
    const MotionPath path = MotionPath::linear({1.0, 0.0}, 1.0);
    const double R = 1.0;
    const ExtensionField v = build_extension_field(g, path, 0.3, R);

    const ScalarField div = divergence_full(g, v.value);
    double worst = 0.0;
    for (int k = 0; k < g.active_count(); ++k) {
        const auto [i, j] = g.active_cell(k);
        worst = std::max(worst, std::abs(div(i, j)));
    }
    CHECK(worst <= 10 * h * h);
    CHECK(v.max_divergence(g) <= 10 * h * h);
    CHECK(v.max_boundary_mismatch(g, {1.0, 0.0}) < 1e-12);

    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i <= g.nx(); ++i) {
            if (g.xface_center(i, j).norm() > R + h) REQUIRE(v.value.x(i, j) == 0.0);
        }
    }
    for (int j = 0; j <= g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            if (g.yface_center(i, j).norm() > R + h) REQUIRE(v.value.y(i, j) == 0.0);
        }
    }
}

TEST_CASE("translation by a whole number of cells shifts values exactly") {
    const Grid g = Grid::box(16, 16, 0.125);
    ScalarField f(16, 16);
    for (int j = 0; j < 16; ++j) {
        for (int i = 0; i < 16; ++i) f(i, j) = i + 100.0 * j;
    }
    const ScalarField t = translate(g, f, {2 * 0.125, -0.125});
    CHECK(t(3, 5) == doctest::Approx(f(5, 4)));
    const ScalarField back = to_moving_frame(g, to_fixed_frame(g, f, {0.25, 0.0}), {0.25, 0.0});
    CHECK(back(7, 7) == doctest::Approx(f(7, 7)));
}

TEST_CASE("smooth step endpoints and symmetry") {
    CHECK(smooth_step(-1.0) == 0.0);
    CHECK(smooth_step(2.0) == 1.0);
    CHECK(smooth_step(0.5) == doctest::Approx(0.5));
    CHECK(smooth_step(0.3) + smooth_step(0.7) == doctest::Approx(1.0));
}
