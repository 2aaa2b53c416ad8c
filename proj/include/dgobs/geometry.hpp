#pragma once

#include <array>
#include <cmath>

namespace dgobs {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double norm(const Vec2& v) { return std::hypot(v.x, v.y); }
inline double dist(const Vec2& a, const Vec2& b) { return norm(a - b); }

/// z-component of the cross product (a x b).
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

/// Signed area of triangle (a,b,c); positive for counterclockwise order.
inline double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * cross(b - a, c - a);
}

inline Vec2 centroid(const Vec2& a, const Vec2& b, const Vec2& c) {
    return (a + b + c) / 3.0;
}

/// Barycentric coordinates of p with respect to triangle (a,b,c).
inline std::array<double, 3> barycentric(const Vec2& a, const Vec2& b, const Vec2& c,
                                         const Vec2& p) {
    const double area = signed_area(a, b, c);
    return {signed_area(p, b, c) / area,
            signed_area(a, p, c) / area,
            signed_area(a, b, p) / area};
}

} // namespace dgobs
