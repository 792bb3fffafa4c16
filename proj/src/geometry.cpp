#include "lowmach/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "lowmach/error.hpp"

namespace lowmach {

namespace {

double distance_to_square(Vec2 p, Vec2 lo, double side) {
    const double cx = std::clamp(p.x, lo.x, lo.x + side);
    const double cy = std::clamp(p.y, lo.y, lo.y + side);
    return std::hypot(p.x - cx, p.y - cy);
}

std::string describe(double L, double a, double h) {
    std::ostringstream os;
    os << "L=" << L << ", a=" << a << ", h=" << h;
    return os.str();
}

}  // namespace

double smooth_step(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

Grid::Grid(int nx, int ny, double h, Vec2 origin, double radius, double half_extent, std::vector<CellKind> kinds)
    : nx_(nx), ny_(ny), h_(h), origin_(origin), radius_(radius), half_extent_(half_extent), kinds_(std::move(kinds)) {
    active_index_.assign(kinds_.size(), -1);
    for (int j = 0; j < ny_; ++j) {
        for (int i = 0; i < nx_; ++i) {
            if (active(i, j)) {
                active_index_[cell_index(i, j)] = static_cast<int>(active_cells_.size());
                active_cells_.emplace_back(i, j);
            }
        }
    }
    classify_faces();
}

Grid Grid::exterior(int dimension, double half_extent, double radius, double h) {
    if (dimension != 2) {
        throw Error(ErrorCode::UnsupportedDimension, "only dimension 2 is implemented, got " + std::to_string(dimension));
    }
    const std::string params = describe(half_extent, radius, h);
    if (!(h > 0.0) || !(half_extent > 0.0)) throw Error(ErrorCode::InvalidArgument, "h and L must be positive (" + params + ")");
    if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "obstacle radius must be positive (" + params + ")");
    const double cells = 2.0 * half_extent / h;
    const int n = static_cast<int>(std::lround(cells));
    if (std::abs(cells - n) > 1e-9 * std::max(1.0, cells)) {
        throw Error(ErrorCode::InvalidArgument, "h must divide 2L (" + params + ")");
    }
    if (2.0 * radius / h < 4.0 || !(radius > 2.0 * h)) {
        throw Error(ErrorCode::GeometryTooCoarse, "fewer than 4 cells across the obstacle (" + params + ")");
    }
    if (!(half_extent > 4.0 * radius)) {
        throw Error(ErrorCode::InvalidArgument, "box must satisfy L > 4a (" + params + ")");
    }

    const Vec2 origin{-half_extent, -half_extent};
    std::vector<CellKind> kinds(static_cast<std::size_t>(n) * n, CellKind::Fluid);
    auto center = [&](int i, int j) { return Vec2{origin.x + (i + 0.5) * h, origin.y + (j + 0.5) * h}; };
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            if (center(i, j).norm() < radius) kinds[static_cast<std::size_t>(j) * n + i] = CellKind::Solid;
        }
    }
    auto solid = [&](int i, int j) {
        return i >= 0 && j >= 0 && i < n && j < n && kinds[static_cast<std::size_t>(j) * n + i] == CellKind::Solid;
    };
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            auto& kind = kinds[static_cast<std::size_t>(j) * n + i];
            if (kind == CellKind::Solid) continue;
            const Vec2 lo{origin.x + i * h, origin.y + j * h};
            const bool touches = solid(i - 1, j) || solid(i + 1, j) || solid(i, j - 1) || solid(i, j + 1);
            if (touches || distance_to_square({0.0, 0.0}, lo, h) < radius) kind = CellKind::Cut;
        }
    }
    return Grid(n, n, h, origin, radius, half_extent, std::move(kinds));
}

Grid Grid::box(int nx, int ny, double h, Vec2 origin) {
    if (nx <= 0 || ny <= 0 || !(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "box needs positive sizes");
    std::vector<CellKind> kinds(static_cast<std::size_t>(nx) * ny, CellKind::Fluid);
    const double half = 0.5 * std::max(nx, ny) * h;
    return Grid(nx, ny, h, origin, 0.0, half, std::move(kinds));
}

Grid Grid::from_solid_mask(int nx, int ny, double h, Vec2 origin, const std::vector<std::uint8_t>& solid) {
    if (solid.size() != static_cast<std::size_t>(nx) * ny) throw Error(ErrorCode::InvalidArgument, "mask size mismatch");
    std::vector<CellKind> kinds(solid.size(), CellKind::Fluid);
    for (std::size_t k = 0; k < solid.size(); ++k) {
        if (solid[k]) kinds[k] = CellKind::Solid;
    }
    auto is_solid = [&](int i, int j) {
        return i >= 0 && j >= 0 && i < nx && j < ny && solid[static_cast<std::size_t>(j) * nx + i];
    };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            auto& kind = kinds[static_cast<std::size_t>(j) * nx + i];
            if (kind != CellKind::Solid &&
                (is_solid(i - 1, j) || is_solid(i + 1, j) || is_solid(i, j - 1) || is_solid(i, j + 1))) {
                kind = CellKind::Cut;
            }
        }
    }
    const double half = 0.5 * std::max(nx, ny) * h;
    return Grid(nx, ny, h, origin, 0.0, half, std::move(kinds));
}

void Grid::classify_faces() {
    auto kind_between = [&](bool left_in, bool left_active, bool right_in, bool right_active) {
        const bool l = left_in && left_active;
        const bool r = right_in && right_active;
        if (l && r) return FaceKind::Open;
        if (l || r) return FaceKind::Wall;
        return FaceKind::Dead;
    };
    xfaces_.assign(static_cast<std::size_t>(nx_ + 1) * ny_, FaceKind::Dead);
    for (int j = 0; j < ny_; ++j) {
        for (int i = 0; i <= nx_; ++i) {
            const bool lin = i > 0, rin = i < nx_;
            xfaces_[static_cast<std::size_t>(j) * (nx_ + 1) + i] =
                kind_between(lin, lin && active(i - 1, j), rin, rin && active(i, j));
        }
    }
    yfaces_.assign(static_cast<std::size_t>(nx_) * (ny_ + 1), FaceKind::Dead);
    for (int j = 0; j <= ny_; ++j) {
        for (int i = 0; i < nx_; ++i) {
            const bool bin = j > 0, tin = j < ny_;
            yfaces_[static_cast<std::size_t>(j) * nx_ + i] =
                kind_between(bin, bin && active(i, j - 1), tin, tin && active(i, j));
        }
    }
}

bool Grid::node_interior(int i, int j) const {
    if (i <= 0 || j <= 0 || i >= nx_ || j >= ny_) return false;
    return active(i - 1, j - 1) && active(i, j - 1) && active(i - 1, j) && active(i, j);
}

std::optional<Vec2> Grid::boundary_normal(int i, int j) const {
    const CellKind kind = cell_kind(i, j);
    if (kind == CellKind::Solid) return std::nullopt;
    if (kind == CellKind::Cut && has_obstacle()) {
        const Vec2 c = cell_center(i, j);
        const double r = c.norm();
        return Vec2{-c.x / r, -c.y / r};
    }
    Vec2 n{};
    if (i == 0) n.x -= 1.0;
    if (i == nx_ - 1) n.x += 1.0;
    if (j == 0) n.y -= 1.0;
    if (j == ny_ - 1) n.y += 1.0;
    const double len = n.norm();
    if (len == 0.0) return std::nullopt;
    return Vec2{n.x / len, n.y / len};
}

int Grid::count(CellKind kind) const {
    return static_cast<int>(std::count(kinds_.begin(), kinds_.end(), kind));
}

int Grid::connected_components() const {
    std::vector<int> label(active_cells_.size(), -1);
    int components = 0;
    std::deque<int> queue;
    for (std::size_t start = 0; start < active_cells_.size(); ++start) {
        if (label[start] >= 0) continue;
        label[start] = components;
        queue.push_back(static_cast<int>(start));
        while (!queue.empty()) {
            const auto [i, j] = active_cells_[queue.front()];
            queue.pop_front();
            const int di[4] = {-1, 1, 0, 0};
            const int dj[4] = {0, 0, -1, 1};
            for (int d = 0; d < 4; ++d) {
                const int ni = i + di[d], nj = j + dj[d];
                if (!in_range(ni, nj) || !active(ni, nj)) continue;
                const int k = active_index(ni, nj);
                if (label[k] < 0) {
                    label[k] = components;
                    queue.push_back(k);
                }
            }
        }
        ++components;
    }
    return components;
}

MotionPath MotionPath::stationary(double horizon) { return MotionPath(Kind::Static, {}, 0.0, horizon); }

MotionPath MotionPath::linear(Vec2 velocity, double horizon) { return MotionPath(Kind::Linear, velocity, 0.0, horizon); }

MotionPath MotionPath::sinusoidal(Vec2 amplitude, double frequency, double horizon) {
    return MotionPath(Kind::Sinusoidal, amplitude, frequency, horizon);
}

MotionSample MotionPath::eval(double t) const {
    const double slack = 1e-12 * std::max(1.0, horizon_);
    if (t < -slack || t > horizon_ + slack) {
        throw Error(ErrorCode::OutOfHorizon,
                    "t=" + std::to_string(t) + " outside [0, " + std::to_string(horizon_) + "]");
    }
    switch (kind_) {
        case Kind::Static:
            return {};
        case Kind::Linear:
            return {t * vector_, vector_, {}};
        case Kind::Sinusoidal: {
            const double w = frequency_;
            return {std::sin(w * t) * vector_, (w * std::cos(w * t)) * vector_, (-w * w * std::sin(w * t)) * vector_};
        }
    }
    return {};
}

double default_extension_radius(double radius, double half_extent, double sponge_width) {
    return radius + 0.5 * (half_extent - sponge_width - radius);
}

ExtensionField build_extension_field(const Grid& grid, const MotionPath& path, double t, double support_radius) {
    const double a = grid.obstacle_radius();
    const double h = grid.h();
    if (!grid.has_obstacle()) throw Error(ErrorCode::InvalidArgument, "extension field needs an obstacle");
    if (!(support_radius > a) || support_radius > grid.half_extent()) {
        throw Error(ErrorCode::InvalidArgument, "support radius must lie in (a, L)");
    }
    const double inner = a + std::max(2.0 * h, 0.25 * (support_radius - a));
    const double outer = support_radius - 2.0 * h;
    if (!(outer > inner)) throw Error(ErrorCode::InvalidArgument, "support radius too close to the obstacle for this h");

    const MotionSample motion = path.eval(t);
    const int nx = grid.nx(), ny = grid.ny();

    // Stream function zeta(r) * (v x y) on nodes; its discrete curl is exactly
    // solenoidal on the staggered grid.
    auto cutoff = [&](Vec2 p) { return 1.0 - smooth_step((p.norm() - inner) / (outer - inner)); };
    std::vector<double> psi(static_cast<std::size_t>(nx + 1) * (ny + 1));
    std::vector<double> dpsi(psi.size());
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            const Vec2 p = grid.node(i, j);
            const double z = cutoff(p);
            const std::size_t k = static_cast<std::size_t>(j) * (nx + 1) + i;
            psi[k] = z * (motion.velocity.x * p.y - motion.velocity.y * p.x);
            dpsi[k] = z * (motion.acceleration.x * p.y - motion.acceleration.y * p.x);
        }
    }
    auto at = [&](const std::vector<double>& s, int i, int j) { return s[static_cast<std::size_t>(j) * (nx + 1) + i]; };

    ExtensionField field;
    field.time = t;
    field.support_radius = support_radius;
    field.inner_radius = inner;
    field.value = FaceField(nx, ny);
    field.time_derivative = FaceField(nx, ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            if (grid.xface_kind(i, j) == FaceKind::Dead) continue;
            field.value.x(i, j) = (at(psi, i, j + 1) - at(psi, i, j)) / h;
            field.time_derivative.x(i, j) = (at(dpsi, i, j + 1) - at(dpsi, i, j)) / h;
        }
    }
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (grid.yface_kind(i, j) == FaceKind::Dead) continue;
            field.value.y(i, j) = -(at(psi, i + 1, j) - at(psi, i, j)) / h;
            field.time_derivative.y(i, j) = -(at(dpsi, i + 1, j) - at(dpsi, i, j)) / h;
        }
    }
    return field;
}

double ExtensionField::max_divergence(const Grid& grid) const {
    double worst = 0.0;
    const double h = grid.h();
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            if (!grid.active(i, j)) continue;
            const double div = (value.x(i + 1, j) - value.x(i, j) + value.y(i, j + 1) - value.y(i, j)) / h;
            worst = std::max(worst, std::abs(div));
        }
    }
    return worst;
}

double ExtensionField::max_boundary_mismatch(const Grid& grid, Vec2 obstacle_velocity) const {
    double worst = 0.0;
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i <= grid.nx(); ++i) {
            if (grid.xface_kind(i, j) == FaceKind::Wall && !grid.xface_on_box_edge(i)) {
                worst = std::max(worst, std::abs(value.x(i, j) - obstacle_velocity.x));
            }
        }
    }
    for (int j = 0; j <= grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            if (grid.yface_kind(i, j) == FaceKind::Wall && !grid.yface_on_box_edge(j)) {
                worst = std::max(worst, std::abs(value.y(i, j) - obstacle_velocity.y));
            }
        }
    }
    return worst;
}

ScalarField translate(const Grid& grid, const ScalarField& f, Vec2 shift) {
    const int nx = grid.nx(), ny = grid.ny();
    const double h = grid.h();
    ScalarField out(nx, ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const Vec2 p = grid.cell_center(i, j) + shift;
            const double fx = std::clamp((p.x - grid.origin().x) / h - 0.5, 0.0, nx - 1.0);
            const double fy = std::clamp((p.y - grid.origin().y) / h - 0.5, 0.0, ny - 1.0);
            const int i0 = std::min(static_cast<int>(fx), nx - 2 < 0 ? 0 : nx - 2);
            const int j0 = std::min(static_cast<int>(fy), ny - 2 < 0 ? 0 : ny - 2);
            const int i1 = std::min(i0 + 1, nx - 1), j1 = std::min(j0 + 1, ny - 1);
            const double tx = fx - i0, ty = fy - j0;
            out(i, j) = (1 - tx) * (1 - ty) * f(i0, j0) + tx * (1 - ty) * f(i1, j0) + (1 - tx) * ty * f(i0, j1) +
                        tx * ty * f(i1, j1);
        }
    }
    return out;
}

}  // namespace lowmach
