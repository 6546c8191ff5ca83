#pragma once

#include <cmath>
#include <numbers>

#include "vwpatch/errors.hpp"
#include "vwpatch/geometry.hpp"

// Closed-form Dirichlet Green's function of -Laplace on the unit disk,
// by the method of images:
//
//   G(x,y) = (1/2pi) ln(1/|x-y|) - h(x,y),
//   h(x,y) = -(1/4pi) ln q(x,y),   q(x,y) = |x|^2|y|^2 - 2 x.y + 1,
//
// q is the squared distance |y||x - y/|y|^2| written without the image
// point, so h is smooth through y = 0 and manifestly symmetric.
// Robin function H(x) = h(x,x)/2 = -(1/4pi) ln(1 - |x|^2).

namespace vwp {

inline constexpr double kCoincidenceTol = 1e-12;

namespace detail {

inline void require_interior(Vec2 p, const char* who) {
    if (!(norm2(p) < 1.0))
        throw ValidationError(std::string(who) + ": point outside the open unit disk");
}

inline double image_q(Vec2 x, Vec2 y) {
    return norm2(x) * norm2(y) - 2.0 * dot(x, y) + 1.0;
}

} // namespace detail

inline double robin_h(Vec2 x, Vec2 y) {
    detail::require_interior(x, "robin_h");
    detail::require_interior(y, "robin_h");
    return -std::log(detail::image_q(x, y)) / (4.0 * std::numbers::pi);
}

inline double robin_H(Vec2 x) {
    detail::require_interior(x, "robin_H");
    return -std::log(1.0 - norm2(x)) / (4.0 * std::numbers::pi);
}

inline Vec2 grad_H(Vec2 x) {
    detail::require_interior(x, "grad_H");
    return x / (2.0 * std::numbers::pi * (1.0 - norm2(x)));
}

inline double green_disk(Vec2 x, Vec2 y) {
    detail::require_interior(x, "green_disk");
    detail::require_interior(y, "green_disk");
    const double r2 = norm2(x - y);
    if (r2 < kCoincidenceTol * kCoincidenceTol)
        throw NumericalError("green_disk: coincident evaluation points");
    return std::log(detail::image_q(x, y) / r2) / (4.0 * std::numbers::pi);
}

// grad in the first argument; grad_y follows by symmetry of G.
inline Vec2 grad_green_disk(Vec2 x, Vec2 y) {
    detail::require_interior(x, "grad_green_disk");
    detail::require_interior(y, "grad_green_disk");
    const Vec2 d = x - y;
    const double r2 = norm2(d);
    if (r2 < kCoincidenceTol * kCoincidenceTol)
        throw NumericalError("grad_green_disk: coincident evaluation points");
    const double q = detail::image_q(x, y);
    const Vec2 image_dir = x * norm2(y) - y;
    return (image_dir / q - d / r2) / (2.0 * std::numbers::pi);
}

inline Vec2 grad_robin_h(Vec2 x, Vec2 y) {
    detail::require_interior(x, "grad_robin_h");
    detail::require_interior(y, "grad_robin_h");
    const double q = detail::image_q(x, y);
    return (x * norm2(y) - y) / (-2.0 * std::numbers::pi * q);
}

// Whole-plane Biot-Savart kernel K(x) = -(1/2pi) Jx/|x|^2.
inline Vec2 biot_savart_K(Vec2 x) {
    const double r2 = norm2(x);
    if (r2 < kCoincidenceTol * kCoincidenceTol)
        throw NumericalError("biot_savart_K: zero separation");
    return rot_cw(x) / (-2.0 * std::numbers::pi * r2);
}

} // namespace vwp
