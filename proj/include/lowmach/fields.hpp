/// @file fields.hpp
/// @brief Grid-shaped storage for cell-centred scalars and face-staggered vectors.
///
/// Layout (row-major, j outer):
///   - ScalarField: nx * ny values at cell centres.
///   - FaceField::x: (nx+1) * ny normal components on x-faces; face (i, j)
///     separates cells (i-1, j) and (i, j).
///   - FaceField::y: nx * (ny+1) normal components on y-faces; face (i, j)
///     separates cells (i, j-1) and (i, j).
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace lowmach {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2 a, Vec2 b) = default;
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
};

/// 2x2 tensor, row index first: xy means d(u_x)/dy for a velocity gradient.
struct Tensor2 {
    double xx = 0.0;
    double xy = 0.0;
    double yx = 0.0;
    double yy = 0.0;

    double trace() const { return xx + yy; }
    Tensor2 transposed() const { return {xx, yx, xy, yy}; }
    double contract(const Tensor2& o) const { return xx * o.xx + xy * o.xy + yx * o.yx + yy * o.yy; }
    friend Tensor2 operator+(const Tensor2& a, const Tensor2& b) {
        return {a.xx + b.xx, a.xy + b.xy, a.yx + b.yx, a.yy + b.yy};
    }
    friend Tensor2 operator*(double s, const Tensor2& a) { return {s * a.xx, s * a.xy, s * a.yx, s * a.yy}; }
    friend bool operator==(const Tensor2&, const Tensor2&) = default;
};

class ScalarField {
public:
    ScalarField() = default;
    ScalarField(int nx, int ny, double value = 0.0)
        : nx_(nx), ny_(ny), data_(static_cast<std::size_t>(nx) * ny, value) {}

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(int i, int j) { return data_[index(i, j)]; }
    double operator()(int i, int j) const { return data_[index(i, j)]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    friend bool operator==(const ScalarField&, const ScalarField&) = default;

private:
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }

    int nx_ = 0;
    int ny_ = 0;
    std::vector<double> data_;
};

class FaceField {
public:
    FaceField() = default;
    FaceField(int nx, int ny)
        : nx_(nx), ny_(ny),
          x_(static_cast<std::size_t>(nx + 1) * ny, 0.0),
          y_(static_cast<std::size_t>(nx) * (ny + 1), 0.0) {}

    int nx() const { return nx_; }
    int ny() const { return ny_; }

    double& x(int i, int j) { return x_[static_cast<std::size_t>(j) * (nx_ + 1) + i]; }
    double x(int i, int j) const { return x_[static_cast<std::size_t>(j) * (nx_ + 1) + i]; }
    double& y(int i, int j) { return y_[static_cast<std::size_t>(j) * nx_ + i]; }
    double y(int i, int j) const { return y_[static_cast<std::size_t>(j) * nx_ + i]; }

    std::vector<double>& xdata() { return x_; }
    const std::vector<double>& xdata() const { return x_; }
    std::vector<double>& ydata() { return y_; }
    const std::vector<double>& ydata() const { return y_; }

    friend bool operator==(const FaceField&, const FaceField&) = default;

private:
    int nx_ = 0;
    int ny_ = 0;
    std::vector<double> x_;
    std::vector<double> y_;
};

/// a += s * b, componentwise.
void axpy(double s, const FaceField& b, FaceField& a);
void axpy(double s, const ScalarField& b, ScalarField& a);

}  // namespace lowmach
