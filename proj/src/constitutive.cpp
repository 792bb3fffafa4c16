#include "lowmach/constitutive.hpp"

#include <cmath>
#include <string>

#include "lowmach/error.hpp"

namespace lowmach {

namespace {

void require_nonnegative(double rho) {
    if (rho < 0.0 || std::isnan(rho)) {
        throw Error(ErrorCode::NegativeDensity, "density " + std::to_string(rho) + " < 0");
    }
}

}  // namespace

void PressureLaw::validate() const {
    if (!(coefficient > 0.0)) throw Error(ErrorCode::InvalidArgument, "pressure coefficient must be positive");
    if (!(gamma > 1.5)) throw Error(ErrorCode::InvalidArgument, "gamma must exceed 3/2");
    if (!(reference_density > 0.0)) throw Error(ErrorCode::InvalidArgument, "reference density must be positive");
}

double PressureLaw::pressure(double rho) const {
    require_nonnegative(rho);
    return coefficient * std::pow(rho, gamma);
}

double PressureLaw::slope(double rho) const {
    require_nonnegative(rho);
    return coefficient * gamma * std::pow(rho, gamma - 1.0);
}

double PressureLaw::potential(double rho) const {
    require_nonnegative(rho);
    return coefficient * rho * (std::pow(rho, gamma - 1.0) - 1.0) / (gamma - 1.0);
}

double PressureLaw::potential_slope(double rho) const {
    require_nonnegative(rho);
    return coefficient * (gamma * std::pow(rho, gamma - 1.0) - 1.0) / (gamma - 1.0);
}

double PressureLaw::relative_entropy(double rho) const {
    const double rb = reference_density;
    if (gamma == 2.0) {
        require_nonnegative(rho);
        const double d = rho - rb;
        return coefficient * d * d;
    }
    return potential(rho) - potential_slope(rb) * (rho - rb) - potential(rb);
}

double PressureLaw::pressure_remainder(double rho) const {
    const double rb = reference_density;
    if (gamma == 2.0) {
        require_nonnegative(rho);
        const double d = rho - rb;
        return coefficient * d * d;
    }
    return pressure(rho) - slope(rb) * (rho - rb) - pressure(rb);
}

void ViscosityPair::validate() const {
    if (!(shear > 0.0)) throw Error(ErrorCode::InvalidArgument, "shear viscosity must be positive");
    if (!(bulk >= 0.0)) throw Error(ErrorCode::InvalidArgument, "bulk viscosity must be nonnegative");
}

Tensor2 stress(const ViscosityPair& visc, const Tensor2& g) {
    const double div = g.trace();
    const double iso = (visc.bulk - 2.0 / 3.0 * visc.shear) * div;
    const double off = visc.shear * (g.xy + g.yx);
    return {2.0 * visc.shear * g.xx + iso, off, off, 2.0 * visc.shear * g.yy + iso};
}

}  // namespace lowmach
