#pragma once

#include <cmath>
#include <ostream>

namespace scatterscan {

/// Point or direction in R^2 or R^3. Planar problems keep z = 0.
struct Vec {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr Vec& operator+=(const Vec& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec& operator-=(const Vec& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
};

constexpr Vec operator+(Vec a, const Vec& b) { return a += b; }
constexpr Vec operator-(Vec a, const Vec& b) { return a -= b; }
constexpr Vec operator-(const Vec& a) { return {-a.x, -a.y, -a.z}; }
constexpr Vec operator*(Vec a, double s) { return a *= s; }
constexpr Vec operator*(double s, Vec a) { return a *= s; }
constexpr Vec operator/(Vec a, double s) { return a *= (1.0 / s); }

constexpr double dot(const Vec& a, const Vec& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec cross(const Vec& a, const Vec& b)
{
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }
inline Vec unit(const Vec& a) { return a / norm(a); }
inline double distance(const Vec& a, const Vec& b) { return norm(a - b); }

/// Angle between two unit vectors, accurate near 0 and pi.
inline double angle_between(const Vec& a, const Vec& b)
{
    return std::atan2(norm(cross(a, b)), dot(a, b));
}

/// Planar unit vector at polar angle phi.
inline Vec polar(double phi) { return {std::cos(phi), std::sin(phi), 0.0}; }

/// Two unit vectors completing `axis` to an orthonormal frame.
inline void orthonormal_frame(const Vec& axis, Vec& e1, Vec& e2)
{
    Vec helper = std::abs(axis.x) < 0.9 ? Vec{1, 0, 0} : Vec{0, 1, 0};
    e1 = unit(cross(axis, helper));
    e2 = cross(axis, e1);
}

inline std::ostream& operator<<(std::ostream& os, const Vec& v)
{
    return os << '(' << v.x << ", " << v.y << ", " << v.z << ')';
}

} // namespace scatterscan
