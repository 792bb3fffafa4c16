#include <doctest.h>

#include <cmath>

#include "lowmach/constitutive.hpp"
#include "lowmach/error.hpp"

using namespace lowmach;

namespace {

// rho * integral_1^rho p(z) / z^2 dz by composite Simpson.
double potential_by_quadrature(const PressureLaw& law, double rho, int n = 4000) {
    const double a = 1.0, b = rho, dz = (b - a) / n;
    double sum = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double z = a + k * dz;
        const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        sum += w * law.pressure(z) / (z * z);
    }
    return rho * sum * dz / 3.0;
}

}  // namespace

TEST_CASE("power law values") {
    const PressureLaw law{1.0, 2.0, 1.0};
    CHECK(law.pressure(0.0) == 0.0);
    CHECK(law.pressure(1.0) == doctest::Approx(1.0));
    CHECK(law.slope(1.0) == doctest::Approx(2.0));
    for (double rho = 1e-3; rho < 1e3; rho *= 1.7) {
        REQUIRE(law.slope(rho) / std::pow(rho, law.gamma - 1.0) == doctest::Approx(2.0).epsilon(1e-13));
    }
    CHECK(law.asymptotic_ratio() == 2.0);
}

TEST_CASE("pressure potential against quadrature") {
    const PressureLaw quad{1.0, 2.0, 1.0};
    CHECK(quad.potential(2.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(quad.potential(1.0) == 0.0);
    for (const PressureLaw& law : {PressureLaw{1.0, 2.0, 1.0}, PressureLaw{1.3, 2.5, 0.8}, PressureLaw{0.7, 1.75, 1.2}}) {
        for (double rho : {0.3, 0.9, 1.0, 1.4, 3.0}) {
            const double oracle = potential_by_quadrature(law, rho);
            REQUIRE(std::abs(law.potential(rho) - oracle) <= 1e-10 * std::max(1.0, std::abs(oracle)));
        }
    }
}

TEST_CASE("relative entropy of the quadratic law") {
    const PressureLaw law{1.0, 2.0, 1.0};
    CHECK(law.relative_entropy(1.5) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(law.relative_entropy(1.0) == 0.0);
    for (double eps : {0.2, 0.05, 0.01}) {
        for (double s : {-2.0, 0.5, 3.0}) {
            REQUIRE(law.relative_entropy(1.0 + eps * s) / (eps * eps) == doctest::Approx(s * s).epsilon(1e-10));
        }
    }
}

TEST_CASE("relative entropy is nonnegative and convex around the reference") {
    const PressureLaw law{1.3, 2.4, 0.9};
    double prev = law.relative_entropy(0.9);
    CHECK(prev == doctest::Approx(0.0).epsilon(1e-15));
    for (double rho = 0.95; rho < 4.0; rho += 0.05) {
        const double e = law.relative_entropy(rho);
        REQUIRE(e >= prev);
        prev = e;
    }
    CHECK(law.pressure_remainder(0.9) == doctest::Approx(0.0));
    CHECK(law.potential_slope(2.0) == doctest::Approx((law.potential(2.0 + 1e-6) - law.potential(2.0 - 1e-6)) / 2e-6));
}

TEST_CASE("law and viscosity validation") {
    CHECK_THROWS_AS((PressureLaw{1.0, 1.4, 1.0}).validate(), Error);
    CHECK_THROWS_AS((PressureLaw{1.0, 2.0, 0.0}).validate(), Error);
    CHECK_NOTHROW((PressureLaw{1.0, 1.6, 1.0}).validate());
    CHECK_THROWS_AS((ViscosityPair{0.0, 0.0}).validate(), Error);
    CHECK_THROWS_AS((ViscosityPair{0.01, -1.0}).validate(), Error);
}

TEST_CASE("Newtonian stress") {
    const ViscosityPair unit{1.0, 0.0};
    const Tensor2 zero = stress(unit, {});
    CHECK(zero == Tensor2{});

    const Tensor2 s = stress(unit, {1, 0, 0, 1});
    CHECK(s.xx == doctest::Approx(2.0 / 3.0));
    CHECK(s.yy == doctest::Approx(2.0 / 3.0));
    CHECK(s.xy == 0.0);

    const Tensor2 rot = stress(unit, {0, 1.5, -1.5, 0});
    CHECK(rot.xx == 0.0);
    CHECK(rot.xy == 0.0);
    CHECK(rot.yx == 0.0);
    CHECK(rot.yy == 0.0);

    const ViscosityPair bulk{0.0, 2.0};
    const Tensor2 b = stress(bulk, {1, 0.3, 0.2, 2});
    CHECK(b.xx == doctest::Approx(6.0));
    CHECK(b.yy == doctest::Approx(6.0));
}
