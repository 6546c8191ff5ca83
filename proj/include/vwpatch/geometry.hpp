#pragma once

#include <cmath>

namespace vwp {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
constexpr double norm2(Vec2 v) { return v.x * v.x + v.y * v.y; }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }

// J(a,b) = (b,-a), clockwise rotation by pi/2.
constexpr Vec2 rot_cw(Vec2 v) { return {v.y, -v.x}; }

inline Vec2 rotate(Vec2 v, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

// The bounded domain: the open disk |x - center| < radius. Only the unit
// disk centered at the origin has closed-form kernels; radius is stored
// explicitly so callers can state it.
struct DiskDomain {
    double radius = 1.0;
    Vec2 center{0.0, 0.0};

    bool contains(Vec2 p, double margin = 0.0) const {
        return dist(p, center) < radius - margin;
    }
    double boundary_clearance(Vec2 p) const { return radius - dist(p, center); }
};

} // namespace vwp
