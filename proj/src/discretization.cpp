#include "lowmach/discretization.hpp"

#include <algorithm>
#include <cmath>

namespace lowmach {

double cell_inner(const Grid& grid, const ScalarField& a, const ScalarField& b) {
    double s = 0.0;
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            if (grid.active(i, j)) s += a(i, j) * b(i, j);
        }
    }
    return s * grid.cell_area();
}

double face_inner(const Grid& grid, const FaceField& a, const FaceField& b) {
    double s = 0.0;
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i <= grid.nx(); ++i) {
            if (grid.xface_kind(i, j) == FaceKind::Open) s += a.x(i, j) * b.x(i, j);
        }
    }
    for (int j = 0; j <= grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            if (grid.yface_kind(i, j) == FaceKind::Open) s += a.y(i, j) * b.y(i, j);
        }
    }
    return s * grid.cell_area();
}

double cell_norm(const Grid& grid, const ScalarField& a) { return std::sqrt(cell_inner(grid, a, a)); }

double face_norm(const Grid& grid, const FaceField& a) { return std::sqrt(face_inner(grid, a, a)); }

double cell_lq_norm(const Grid& grid, const ScalarField& f, double q) {
    double s = 0.0;
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            if (grid.active(i, j)) s += std::pow(std::abs(f(i, j)), q);
        }
    }
    return std::pow(s * grid.cell_area(), 1.0 / q);
}

double cell_mean(const Grid& grid, const ScalarField& f) {
    double s = 0.0;
    for (int k = 0; k < grid.active_count(); ++k) {
        const auto [i, j] = grid.active_cell(k);
        s += f(i, j);
    }
    return grid.active_count() > 0 ? s / grid.active_count() : 0.0;
}

void apply_wall_values(const Grid& grid, FaceField& u, Vec2 obstacle_velocity) {
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i <= grid.nx(); ++i) {
            switch (grid.xface_kind(i, j)) {
                case FaceKind::Open: break;
                case FaceKind::Wall: u.x(i, j) = grid.xface_on_box_edge(i) ? 0.0 : obstacle_velocity.x; break;
                case FaceKind::Dead: u.x(i, j) = 0.0; break;
            }
        }
    }
    for (int j = 0; j <= grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            switch (grid.yface_kind(i, j)) {
                case FaceKind::Open: break;
                case FaceKind::Wall: u.y(i, j) = grid.yface_on_box_edge(j) ? 0.0 : obstacle_velocity.y; break;
                case FaceKind::Dead: u.y(i, j) = 0.0; break;
            }
        }
    }
}

void clear_non_open(const Grid& grid, FaceField& u) {
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i <= grid.nx(); ++i) {
            if (grid.xface_kind(i, j) != FaceKind::Open) u.x(i, j) = 0.0;
        }
    }
    for (int j = 0; j <= grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            if (grid.yface_kind(i, j) != FaceKind::Open) u.y(i, j) = 0.0;
        }
    }
}

FaceField gradient(const Grid& grid, const ScalarField& phi) {
    const double inv_h = 1.0 / grid.h();
    FaceField g(grid.nx(), grid.ny());
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 1; i < grid.nx(); ++i) {
            if (grid.xface_kind(i, j) == FaceKind::Open) g.x(i, j) = (phi(i, j) - phi(i - 1, j)) * inv_h;
        }
    }
    for (int j = 1; j < grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            if (grid.yface_kind(i, j) == FaceKind::Open) g.y(i, j) = (phi(i, j) - phi(i, j - 1)) * inv_h;
        }
    }
    return g;
}

namespace {

ScalarField divergence_impl(const Grid& grid, const FaceField& v, bool with_walls) {
    const double inv_h = 1.0 / grid.h();
    ScalarField d(grid.nx(), grid.ny());
    auto xflux = [&](int i, int j) {
        const FaceKind k = grid.xface_kind(i, j);
        return (k == FaceKind::Open || (with_walls && k == FaceKind::Wall)) ? v.x(i, j) : 0.0;
    };
    auto yflux = [&](int i, int j) {
        const FaceKind k = grid.yface_kind(i, j);
        return (k == FaceKind::Open || (with_walls && k == FaceKind::Wall)) ? v.y(i, j) : 0.0;
    };
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            if (!grid.active(i, j)) continue;
            d(i, j) = (xflux(i + 1, j) - xflux(i, j) + yflux(i, j + 1) - yflux(i, j)) * inv_h;
        }
    }
    return d;
}

}  // namespace

ScalarField divergence_open(const Grid& grid, const FaceField& v) { return divergence_impl(grid, v, false); }

ScalarField divergence_full(const Grid& grid, const FaceField& v) { return divergence_impl(grid, v, true); }

GradientField velocity_gradient(const Grid& grid, const FaceField& u) {
    const int nx = grid.nx(), ny = grid.ny();
    const double inv_h = 1.0 / grid.h();
    GradientField g(nx, ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (!grid.active(i, j)) continue;
            g.xx(i, j) = (u.x(i + 1, j) - u.x(i, j)) * inv_h;
            g.yy(i, j) = (u.y(i, j + 1) - u.y(i, j)) * inv_h;
        }
    }
    for (int j = 1; j < ny; ++j) {
        for (int i = 1; i < nx; ++i) {
            if (!grid.node_interior(i, j)) continue;
            g.xy(i, j) = (u.x(i, j) - u.x(i, j - 1)) * inv_h;
            g.yx(i, j) = (u.y(i, j) - u.y(i - 1, j)) * inv_h;
        }
    }
    return g;
}

TensorField stress_field(const Grid& grid, const ViscosityPair& visc, const GradientField& grad) {
    const int nx = grid.nx(), ny = grid.ny();
    TensorField s(nx, ny);
    const double mu = visc.shear;
    const double lam = visc.bulk - 2.0 / 3.0 * mu;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (!grid.active(i, j)) continue;
            const double div = grad.xx(i, j) + grad.yy(i, j);
            s.xx(i, j) = 2.0 * mu * grad.xx(i, j) + lam * div;
            s.yy(i, j) = 2.0 * mu * grad.yy(i, j) + lam * div;
        }
    }
    for (int j = 1; j < ny; ++j) {
        for (int i = 1; i < nx; ++i) {
            if (!grid.node_interior(i, j)) continue;
            const double shear = mu * (grad.xy(i, j) + grad.yx(i, j));
            s.xy(i, j) = shear;
            s.yx(i, j) = shear;
        }
    }
    return s;
}

FaceField tensor_divergence(const Grid& grid, const TensorField& t) {
    const int nx = grid.nx(), ny = grid.ny();
    const double inv_h = 1.0 / grid.h();
    FaceField f(nx, ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 1; i < nx; ++i) {
            if (grid.xface_kind(i, j) != FaceKind::Open) continue;
            f.x(i, j) = (t.xx(i, j) - t.xx(i - 1, j) + t.xy(i, j + 1) - t.xy(i, j)) * inv_h;
        }
    }
    for (int j = 1; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (grid.yface_kind(i, j) != FaceKind::Open) continue;
            f.y(i, j) = (t.yy(i, j) - t.yy(i, j - 1) + t.yx(i + 1, j) - t.yx(i, j)) * inv_h;
        }
    }
    return f;
}

double tensor_contract(const Grid& grid, const TensorField& t, const GradientField& g) {
    double s = 0.0;
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            if (grid.active(i, j)) s += t.xx(i, j) * g.xx(i, j) + t.yy(i, j) * g.yy(i, j);
        }
    }
    for (int j = 1; j < grid.ny(); ++j) {
        for (int i = 1; i < grid.nx(); ++i) {
            if (grid.node_interior(i, j)) s += t.xy(i, j) * g.xy(i, j) + t.yx(i, j) * g.yx(i, j);
        }
    }
    return s * grid.cell_area();
}

FaceField advection(const Grid& grid, const FaceField& u, Vec2 frame_velocity) {
    const int nx = grid.nx(), ny = grid.ny();
    const double half_inv_h = 0.5 / grid.h();
    FaceField a(nx, ny);
    auto upwind = [&](double w, double lo, double c, double hi) {
        return (w * (hi - lo) - std::abs(w) * (hi - 2.0 * c + lo)) * half_inv_h;
    };
    for (int j = 0; j < ny; ++j) {
        for (int i = 1; i < nx; ++i) {
            if (grid.xface_kind(i, j) != FaceKind::Open) continue;
            const double c = u.x(i, j);
            const double wx = c - frame_velocity.x;
            const double wy = 0.25 * (u.y(i - 1, j) + u.y(i, j) + u.y(i - 1, j + 1) + u.y(i, j + 1)) - frame_velocity.y;
            const double s = (j > 0 && grid.xface_kind(i, j - 1) == FaceKind::Open) ? u.x(i, j - 1) : c;
            const double n = (j < ny - 1 && grid.xface_kind(i, j + 1) == FaceKind::Open) ? u.x(i, j + 1) : c;
            a.x(i, j) = upwind(wx, u.x(i - 1, j), c, u.x(i + 1, j)) + upwind(wy, s, c, n);
        }
    }
    for (int j = 1; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (grid.yface_kind(i, j) != FaceKind::Open) continue;
            const double c = u.y(i, j);
            const double wy = c - frame_velocity.y;
            const double wx = 0.25 * (u.x(i, j - 1) + u.x(i + 1, j - 1) + u.x(i, j) + u.x(i + 1, j)) - frame_velocity.x;
            const double w = (i > 0 && grid.yface_kind(i - 1, j) == FaceKind::Open) ? u.y(i - 1, j) : c;
            const double e = (i < nx - 1 && grid.yface_kind(i + 1, j) == FaceKind::Open) ? u.y(i + 1, j) : c;
            a.y(i, j) = upwind(wy, u.y(i, j - 1), c, u.y(i, j + 1)) + upwind(wx, w, c, e);
        }
    }
    return a;
}

TensorField momentum_flux(const Grid& grid, const ScalarField& rho, const FaceField& u) {
    const int nx = grid.nx(), ny = grid.ny();
    TensorField t(nx, ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (!grid.active(i, j)) continue;
            const double ux = 0.5 * (u.x(i, j) + u.x(i + 1, j));
            const double uy = 0.5 * (u.y(i, j) + u.y(i, j + 1));
            t.xx(i, j) = rho(i, j) * ux * ux;
            t.yy(i, j) = rho(i, j) * uy * uy;
        }
    }
    for (int j = 1; j < ny; ++j) {
        for (int i = 1; i < nx; ++i) {
            if (!grid.node_interior(i, j)) continue;
            const double r = 0.25 * (rho(i - 1, j - 1) + rho(i, j - 1) + rho(i - 1, j) + rho(i, j));
            const double ux = 0.5 * (u.x(i, j - 1) + u.x(i, j));
            const double uy = 0.5 * (u.y(i - 1, j) + u.y(i, j));
            t.xy(i, j) = r * ux * uy;
            t.yx(i, j) = r * ux * uy;
        }
    }
    return t;
}

FaceField face_average(const Grid& grid, const ScalarField& cell) {
    const int nx = grid.nx(), ny = grid.ny();
    FaceField f(nx, ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            const bool l = i > 0 && grid.active(i - 1, j);
            const bool r = i < nx && grid.active(i, j);
            if (l && r) f.x(i, j) = 0.5 * (cell(i - 1, j) + cell(i, j));
            else if (l) f.x(i, j) = cell(i - 1, j);
            else if (r) f.x(i, j) = cell(i, j);
        }
    }
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const bool b = j > 0 && grid.active(i, j - 1);
            const bool t = j < ny && grid.active(i, j);
            if (b && t) f.y(i, j) = 0.5 * (cell(i, j - 1) + cell(i, j));
            else if (b) f.y(i, j) = cell(i, j - 1);
            else if (t) f.y(i, j) = cell(i, j);
        }
    }
    return f;
}

double sponge_profile(const Grid& grid, Vec2 p, double width) {
    if (width <= 0.0) return 0.0;
    const double depth = std::max(std::abs(p.x), std::abs(p.y)) - (grid.half_extent() - width);
    const double xi = std::clamp(depth / width, 0.0, 1.0);
    return xi * xi * xi;
}

}  // namespace lowmach
