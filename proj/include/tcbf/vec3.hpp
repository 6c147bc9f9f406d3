#pragma once

#include <array>
#include <cmath>

namespace tcbf {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }

    Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    Vec3& operator-=(const Vec3& o) {
        x -= o.x;
        y -= o.y;
        z -= o.z;
        return *this;
    }
    Vec3& operator*=(double s) {
        x *= s;
        y *= s;
        z *= s;
        return *this;
    }

    constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    constexpr Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    constexpr double squared_norm() const { return dot(*this); }
    double norm() const { return std::sqrt(squared_norm()); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }

    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline constexpr Vec3 e3_axis() { return {0.0, 0.0, 1.0}; }

/// Row-major 3x3 matrix; enough for rotations, inertia tensors and gains.
struct Mat3 {
    std::array<double, 9> a{};

    static Mat3 identity() {
        Mat3 m;
        m.a = {1, 0, 0, 0, 1, 0, 0, 0, 1};
        return m;
    }
    static Mat3 zero() { return Mat3{}; }
    static Mat3 diag(double d0, double d1, double d2) {
        Mat3 m;
        m(0, 0) = d0;
        m(1, 1) = d1;
        m(2, 2) = d2;
        return m;
    }
    static Mat3 from_cols(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
        Mat3 m;
        m.a = {c0.x, c1.x, c2.x, c0.y, c1.y, c2.y, c0.z, c1.z, c2.z};
        return m;
    }

    double& operator()(int r, int c) { return a[static_cast<std::size_t>(3 * r + c)]; }
    double operator()(int r, int c) const { return a[static_cast<std::size_t>(3 * r + c)]; }

    Vec3 col(int c) const { return {(*this)(0, c), (*this)(1, c), (*this)(2, c)}; }
    Vec3 row(int r) const { return {(*this)(r, 0), (*this)(r, 1), (*this)(r, 2)}; }

    Mat3 transposed() const {
        Mat3 t;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) t(c, r) = (*this)(r, c);
        return t;
    }

    Mat3 operator+(const Mat3& o) const {
        Mat3 m;
        for (int i = 0; i < 9; ++i) m.a[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)] + o.a[static_cast<std::size_t>(i)];
        return m;
    }
    Mat3 operator-(const Mat3& o) const {
        Mat3 m;
        for (int i = 0; i < 9; ++i) m.a[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)] - o.a[static_cast<std::size_t>(i)];
        return m;
    }
    Mat3 operator*(double s) const {
        Mat3 m;
        for (int i = 0; i < 9; ++i) m.a[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)] * s;
        return m;
    }
    Vec3 operator*(const Vec3& v) const {
        return {row(0).dot(v), row(1).dot(v), row(2).dot(v)};
    }
    Mat3 operator*(const Mat3& o) const {
        Mat3 m;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += (*this)(r, k) * o(k, c);
                m(r, c) = s;
            }
        return m;
    }

    double det() const {
        return (*this)(0, 0) * ((*this)(1, 1) * (*this)(2, 2) - (*this)(1, 2) * (*this)(2, 1)) -
               (*this)(0, 1) * ((*this)(1, 0) * (*this)(2, 2) - (*this)(1, 2) * (*this)(2, 0)) +
               (*this)(0, 2) * ((*this)(1, 0) * (*this)(2, 1) - (*this)(1, 1) * (*this)(2, 0));
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : a) m = std::max(m, std::abs(v));
        return m;
    }

    bool finite() const {
        for (double v : a)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline double max_abs_diff(const Mat3& a, const Mat3& b) { return (a - b).max_abs(); }

/// Inverse by adjugate; caller guarantees det != 0.
inline Mat3 inverse(const Mat3& m) {
    const double d = m.det();
    Mat3 inv;
    inv(0, 0) = (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) / d;
    inv(0, 1) = (m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2)) / d;
    inv(0, 2) = (m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1)) / d;
    inv(1, 0) = (m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2)) / d;
    inv(1, 1) = (m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0)) / d;
    inv(1, 2) = (m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2)) / d;
    inv(2, 0) = (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0)) / d;
    inv(2, 1) = (m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1)) / d;
    inv(2, 2) = (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)) / d;
    return inv;
}

}  // namespace tcbf
