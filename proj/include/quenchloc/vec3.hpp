// SPDX-License-Identifier: Apache-2.0
#ifndef QUENCHLOC_VEC3_HPP
#define QUENCHLOC_VEC3_HPP

#include <cmath>
#include <ostream>

namespace quench {

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
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    constexpr Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    constexpr double norm2() const { return dot(*this); }
    Vec3 normalized() const {
        const double n = norm();
        return {x / n, y / n, z / n};
    }
};

inline constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }
inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

// Unit vector within 1e-12 of norm 1.
inline bool is_unit(const Vec3& v, double tol = 1e-12) {
    return std::abs(v.norm() - 1.0) <= tol;
}

// Unit vector orthogonal to n: the global axis least aligned with n,
// projected onto n's orthogonal plane (so n = z gives x, etc.).
inline Vec3 any_orthogonal(const Vec3& n) {
    const Vec3 axis = (std::abs(n.x) <= std::abs(n.y) && std::abs(n.x) <= std::abs(n.z))
                          ? Vec3{1, 0, 0}
                          : (std::abs(n.y) <= std::abs(n.z) ? Vec3{0, 1, 0} : Vec3{0, 0, 1});
    const Vec3 proj = axis - n * (axis.dot(n) / n.dot(n));
    return proj.normalized();
}

inline std::ostream& operator<<(std::ostream& os, const Vec3& v) {
    return os << "(" << v.x << ", " << v.y << ", " << v.z << ")";
}

}  // namespace quench

#endif
