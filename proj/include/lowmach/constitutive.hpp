// Barotropic pressure law and Newtonian viscous stress.
#pragma once

#include "lowmach/fields.hpp"

namespace lowmach {

/// p(rho) = a * rho^gamma around the reference density rho_bar.
struct PressureLaw {
    double coefficient = 1.0;
    double gamma = 2.0;
    double reference_density = 1.0;

    /// Throws invalid-argument unless a > 0, gamma > 3/2, rho_bar > 0.
    void validate() const;

    double pressure(double rho) const;
    double slope(double rho) const;
    /// P(rho) = rho * integral_1^rho p(z)/z^2 dz.
    double potential(double rho) const;
    double potential_slope(double rho) const;
    /// E(rho | rho_bar) = P(rho) - P'(rho_bar)(rho - rho_bar) - P(rho_bar).
    double relative_entropy(double rho) const;
    /// p(rho) - p'(rho_bar)(rho - rho_bar) - p(rho_bar).
    double pressure_remainder(double rho) const;
    /// p'(rho_bar).
    double reference_slope() const { return slope(reference_density); }
    /// p'(rho)/rho^(gamma-1), constant for the power law.
    double asymptotic_ratio() const { return coefficient * gamma; }
};

struct ViscosityPair {
    double shear = 0.01;
    double bulk = 0.0;

    void validate() const;
};

/// S = mu (G + G^T - 2/3 tr(G) I) + eta tr(G) I.
Tensor2 stress(const ViscosityPair& visc, const Tensor2& grad_u);

}  // namespace lowmach
