// Essential/residual splitting, uniform-estimate monitors and convergence metrics.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lowmach/compressible.hpp"
#include "lowmach/incompressible.hpp"
#include "lowmach/spectral.hpp"

namespace lowmach {

/// 1 where rho_bar/2 < rho < 2 rho_bar.
inline bool essential_density(double rho, double rho_bar) { return rho > 0.5 * rho_bar && rho < 2.0 * rho_bar; }

struct EssResSplit {
    ScalarField essential;
    ScalarField residual;
    ScalarField indicator;
};

/// [f]_ess = f on the essential set, [f]_res = f - [f]_ess. Solid cells are zero.
EssResSplit split_ess_res(const Grid& grid, const ScalarField& rho, const ScalarField& f, double rho_bar);

struct MetricsRecord {
    std::string run_id;
    double eps = 0.0;
    std::string metric;
    double q = 2.0;
    std::string window = "full";
    std::optional<double> time;  ///< empty for suprema and time integrals
    double value = 0.0;
};

std::string metrics_csv_header();
std::string to_csv_row(const MetricsRecord& r);

/// Streaming form of the uniform estimates: feed snapshots in time order.
class UniformEstimateMonitor {
public:
    UniformEstimateMonitor(const Grid& grid, const PressureLaw& law, double eps, double q);

    void add(const FluidState& state);
    std::vector<MetricsRecord> report(const std::string& run_id) const;

    double residual_measure() const { return sup_res_measure_; }

private:
    const Grid* grid_;
    PressureLaw law_;
    double eps_;
    double q_;
    double sup_ess_l2_ = 0.0;
    double sup_res_lgamma_ = 0.0;
    double sup_res_measure_ = 0.0;
    double sup_res_lq_ = 0.0;
    double sup_momentum_ = 0.0;
    double h1_integral_ = 0.0;
    double last_time_ = 0.0;
    double last_h1_sq_ = 0.0;
    int count_ = 0;
};

std::vector<MetricsRecord> uniform_estimate_report(const Grid& grid, const std::vector<FluidState>& trajectory,
                                                   const PressureLaw& law, double eps, double q,
                                                   const std::string& run_id = "run");

/// Annulus inner <= |y| <= outer used as the compact observation window.
struct Window {
    double inner = 0.0;
    double outer = 0.0;

    static Window standard(double obstacle_radius) { return {1.2 * obstacle_radius, 3.0 * obstacle_radius}; }
    bool contains(Vec2 p) const {
        const double r = p.norm();
        return r >= inner && r <= outer;
    }
    std::string tag() const;
};

/// Divergence-free vortex patch inside the window, built as the discrete curl
/// of a C^2 node stream function that vanishes outside a disk of radius
/// (outer - inner) * 0.45 around a point at the window's mid radius.
FaceField vortex_test_field(const Grid& grid, const Window& window);

/// ||a|| where a = <W, phi> - <W, H phi> + <Psi, div (phi - H phi)> and
/// Psi is the potential of W, relative to ||W|| ||phi||.
double assembly_identity_residual(const PoissonSolver& solver, const FaceField& w, const FaceField& phi);

/// W = rho u - rho_bar V - eps m' (rho - rho_bar)/eps on open faces.
FaceField shifted_momentum(const Grid& grid, const FluidState& state, const PressureLaw& law, Vec2 obstacle_velocity,
                           const FaceField& extension);

/// Streaming form of the convergence metrics: (i) sup ||rho - rho_bar|| / eps,
/// (ii) ||u - U||_{L^2((0,T) x K)}, (iii) ||<W, H phi> - <rho_bar (U - V), phi>||_{L^2(0,T)}.
class ConvergenceMonitor {
public:
    ConvergenceMonitor(const Grid& grid, const PressureLaw& law, const MotionPath& path, const ExtensionBasis& extension,
                       Window window, FaceField projected_test, FaceField test);

    /// Throws schedule-mismatch when the times differ.
    void add(const FluidState& state, const FaceField& reference_velocity, double reference_time);
    std::vector<MetricsRecord> report(const std::string& run_id) const;

    double density_deviation() const { return sup_density_; }
    double velocity_error() const;
    double solenoidal_error() const;
    const std::vector<double>& solenoidal_series() const { return series_diff_; }

private:
    const Grid* grid_;
    PressureLaw law_;
    MotionPath path_;
    const ExtensionBasis* extension_;
    Window window_;
    FaceField projected_test_;
    FaceField test_;
    std::vector<std::uint8_t> xmask_, ymask_;
    double eps_ = 0.0;
    double sup_density_ = 0.0;
    std::vector<double> times_;
    std::vector<double> series_velocity_;
    std::vector<double> series_diff_;
};

/// Batch form over stored trajectories sharing a schedule.
std::vector<MetricsRecord> convergence_metrics(const Grid& grid, const PressureLaw& law, const MotionPath& path,
                                               const std::vector<FluidState>& compressible,
                                               const std::vector<IncompressibleState>& reference,
                                               const PoissonSolver& solver, const Window& window,
                                               double extension_radius, const std::string& run_id = "run");

/// Trapezoidal sqrt(integral of f^2) over the sample times.
double l2_in_time(const std::vector<double>& times, const std::vector<double>& values);

}  // namespace lowmach
