#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "vwpatch/kernels.hpp"

using namespace vwp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<Vec2> random_interior_points(int count, unsigned seed, double max_r = 0.9) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Vec2> pts;
    while (static_cast<int>(pts.size()) < count) {
        const double r = max_r * std::sqrt(unif(rng));
        const double th = 2.0 * pi * unif(rng);
        pts.push_back({r * std::cos(th), r * std::sin(th)});
    }
    return pts;
}

template <typename F>
Vec2 central_gradient(F&& f, Vec2 x, double step = 1e-5) {
    return {(f(Vec2{x.x + step, x.y}) - f(Vec2{x.x - step, x.y})) / (2.0 * step),
            (f(Vec2{x.x, x.y + step}) - f(Vec2{x.x, x.y - step})) / (2.0 * step)};
}

} // namespace

TEST_CASE("green_disk matches the method-of-images closed form", "[kernels]") {
    // h(0, y) = 0 on the unit disk, so G((0,0),(0.5,0)) = ln(2)/(2 pi)
    CHECK_THAT(green_disk({0, 0}, {0.5, 0}), WithinRel(std::log(2.0) / (2.0 * pi), 1e-14));
    CHECK_THAT(green_disk({0, 0}, {0.5, 0}), WithinAbs(0.110318, 1e-6));
}

TEST_CASE("green_disk is exactly symmetric", "[kernels]") {
    const auto pts = random_interior_points(200, 1);
    for (int t = 0; t < 100; ++t) {
        const Vec2 x = pts[2 * t], y = pts[2 * t + 1];
        if (dist(x, y) < 1e-3) continue;
        CHECK(green_disk(x, y) == green_disk(y, x));
    }
}

TEST_CASE("green_disk vanishes toward the boundary", "[kernels]") {
    const Vec2 y{1.0 - 1e-6, 0.0};
    CHECK(std::abs(green_disk({0, 0}, y)) < 1e-5);
    // decay envelope near the boundary
    for (double gap : {1e-5, 5e-5, 1e-4}) {
        const Vec2 yb{0.3, -(1.0 - gap) * std::sin(std::acos(0.3 / (1.0 - gap)))};
        (void)yb;
        const Vec2 yy{(1.0 - gap) * 0.6, (1.0 - gap) * 0.8};
        CHECK(std::abs(green_disk({0.2, -0.1}, yy)) < 1e-3 * (1.0 + std::abs(std::log(gap))));
    }
}

TEST_CASE("robin function closed forms", "[kernels]") {
    CHECK(robin_H({0, 0}) == 0.0);
    CHECK_THAT(robin_H({0.5, 0}), WithinRel(-std::log(0.75) / (4.0 * pi), 1e-14));
    CHECK_THAT(robin_H({0.5, 0}), WithinAbs(0.0228930, 1e-6));
    // h is the regular part: G + (1/2pi) ln|x-y| = -h
    const Vec2 x{0.3, 0.2}, y{-0.1, 0.4};
    CHECK_THAT(green_disk(x, y) - std::log(1.0 / dist(x, y)) / (2.0 * pi),
               WithinAbs(-robin_h(x, y), 1e-15));
    CHECK_THAT(robin_h(x, x), WithinRel(2.0 * robin_H(x), 1e-14));
}

TEST_CASE("grad_H matches central finite differences", "[kernels]") {
    const auto pts = random_interior_points(50, 2);
    for (const Vec2& x : pts) {
        const Vec2 g = grad_H(x);
        const Vec2 fd = central_gradient([](Vec2 q) { return robin_H(q); }, x);
        CHECK_THAT(g.x, WithinRel(fd.x, 1e-6) || WithinAbs(fd.x, 1e-10));
        CHECK_THAT(g.y, WithinRel(fd.y, 1e-6) || WithinAbs(fd.y, 1e-10));
    }
}

TEST_CASE("grad_green_disk matches central finite differences", "[kernels]") {
    const auto pts = random_interior_points(100, 3);
    int checked = 0;
    for (int t = 0; t < 50; ++t) {
        const Vec2 x = pts[2 * t], y = pts[2 * t + 1];
        if (dist(x, y) < 0.05) continue;
        const Vec2 g = grad_green_disk(x, y);
        const Vec2 fd = central_gradient([y](Vec2 q) { return green_disk(q, y); }, x);
        CHECK_THAT(g.x, WithinRel(fd.x, 1e-6) || WithinAbs(fd.x, 1e-10));
        CHECK_THAT(g.y, WithinRel(fd.y, 1e-6) || WithinAbs(fd.y, 1e-10));
        ++checked;
    }
    CHECK(checked >= 40);
}

TEST_CASE("grad_green_disk axial and rotational symmetry", "[kernels]") {
    // on-axis configuration: gradient is radial
    const Vec2 g = grad_green_disk({0, 0}, {0.5, 0});
    CHECK(g.y == 0.0);
    // first-kernel term -(1/2pi)(x-y)/|x-y|^2 = (1/2pi)(2,0) plus image
    // term -(1/2pi)(x-y*)/|x-y*|^2 = -(1/2pi)(0.5,0) with y* = (2,0)
    const double first = 2.0 / (2.0 * pi);
    const double image = -0.5 / (2.0 * pi);
    CHECK_THAT(g.x, WithinRel(first + image, 1e-13));

    // rotating both arguments rotates the gradient
    const Vec2 x{0.3, -0.2}, y{-0.4, 0.1};
    const Vec2 base = grad_green_disk(x, y);
    for (double th : {0.7, 2.1, -1.3}) {
        const Vec2 rotated = grad_green_disk(rotate(x, th), rotate(y, th));
        const Vec2 expect = rotate(base, th);
        CHECK_THAT(rotated.x, WithinAbs(expect.x, 1e-10));
        CHECK_THAT(rotated.y, WithinAbs(expect.y, 1e-10));
    }
}

TEST_CASE("biot_savart_K closed form and identities", "[kernels]") {
    const Vec2 k1 = biot_savart_K({1, 0});
    CHECK(k1.x == 0.0);
    CHECK_THAT(k1.y, WithinRel(1.0 / (2.0 * pi), 1e-15));

    const auto pts = random_interior_points(20, 4);
    for (const Vec2& x : pts) {
        if (norm(x) < 0.05) continue;
        const Vec2 k = biot_savart_K(x);
        CHECK_THAT(norm(k), WithinRel(1.0 / (2.0 * pi * norm(x)), 1e-13));
        CHECK_THAT(dot(k, x), WithinAbs(0.0, 1e-15));
    }
}

TEST_CASE("kernel domain and coincidence guards", "[kernels]") {
    CHECK_THROWS_AS(green_disk({0, 0}, {0, 0}), NumericalError);
    CHECK_THROWS_AS(green_disk({0.2, 0.1}, {0.2 + 1e-13, 0.1}), NumericalError);
    CHECK_THROWS_AS(green_disk({1.1, 0}, {0.2, 0.1}), ValidationError);
    CHECK_THROWS_AS(green_disk({0.2, 0.1}, {1.0, 0}), ValidationError);
    CHECK_THROWS_AS(robin_H({0, 1.0}), ValidationError);
    CHECK_THROWS_AS(grad_green_disk({0.5, 0.5}, {0.5, 0.5}), NumericalError);
    CHECK_THROWS_AS(biot_savart_K({0, 0}), NumericalError);
}
