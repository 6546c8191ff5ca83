#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "vwpatch/point_vortex.hpp"

using namespace vwp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double pi = std::numbers::pi;

PointVortexSystem random_system(int k, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    PointVortexSystem sys;
    while (static_cast<int>(sys.positions.size()) < k) {
        const double r = 0.85 * std::sqrt(unif(rng));
        const double th = 2.0 * pi * unif(rng);
        const Vec2 cand{r * std::cos(th), r * std::sin(th)};
        bool ok = true;
        for (const Vec2& p : sys.positions) ok = ok && dist(p, cand) > 0.1;
        if (!ok) continue;
        sys.positions.push_back(cand);
        sys.strengths.push_back(unif(rng) > 0.5 ? 1.0 + unif(rng) : -1.0 - unif(rng));
    }
    return sys;
}

// brute-force scan of K_2 over the symmetric slice ((a,0),(-a,0))
double dipole_slice_minimum() {
    auto value = [](double a) {
        return kr_value({{{a, 0.0}, {-a, 0.0}}, {1.0, -1.0}});
    };
    double best_a = 0.0, best_v = std::numeric_limits<double>::infinity();
    for (int t = 0; t <= 6000; ++t) {
        const double a = 0.1 + t * 1e-4;
        const double v = value(a);
        if (v < best_v) {
            best_v = v;
            best_a = a;
        }
    }
    // parabolic refinement
    const double s = 1e-4;
    const double vm = value(best_a - s), v0 = value(best_a), vp = value(best_a + s);
    return best_a + 0.5 * s * (vm - vp) / (vm - 2.0 * v0 + vp);
}

} // namespace

TEST_CASE("kr_value single vortex equals 2 kappa^2 H", "[point_vortex]") {
    CHECK(kr_value({{{0.0, 0.0}}, {1.0}}) == 0.0);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> unif(-0.8, 0.8);
    for (int t = 0; t < 20; ++t) {
        const Vec2 x{unif(rng) * 0.7, unif(rng) * 0.7};
        const double kappa = unif(rng) + (unif(rng) > 0 ? 1.5 : -1.5);
        CHECK_THAT(kr_value({{x}, {kappa}}), WithinRel(2.0 * kappa * kappa * robin_H(x), 1e-14));
    }
}

TEST_CASE("kr_value symmetry under permutation and rotation", "[point_vortex]") {
    const PointVortexSystem sys{{{0.3, 0.1}, {-0.2, -0.4}}, {1.0, 1.0}};
    const PointVortexSystem swapped{{{-0.2, -0.4}, {0.3, 0.1}}, {1.0, 1.0}};
    CHECK(kr_value(sys) == kr_value(swapped));

    const PointVortexSystem mixed{{{0.3, 0.1}, {-0.2, -0.4}, {0.5, -0.3}}, {1.0, -2.0, 0.7}};
    for (double th : {0.3, 1.9}) {
        PointVortexSystem rot = mixed;
        for (Vec2& p : rot.positions) p = rotate(p, th);
        CHECK_THAT(kr_value(rot), WithinRel(kr_value(mixed), 1e-12));
    }
}

TEST_CASE("kr_gradient matches finite differences", "[point_vortex]") {
    for (unsigned seed = 0; seed < 20; ++seed) {
        PointVortexSystem sys = random_system(3, 100 + seed);
        const auto g = kr_gradient(sys);
        for (std::size_t m = 0; m < sys.size(); ++m) {
            for (int c = 0; c < 2; ++c) {
                const double step = 1e-6;
                PointVortexSystem up = sys, dn = sys;
                (c == 0 ? up.positions[m].x : up.positions[m].y) += step;
                (c == 0 ? dn.positions[m].x : dn.positions[m].y) -= step;
                const double fd = (kr_value(up) - kr_value(dn)) / (2.0 * step);
                const double got = c == 0 ? g[m].x : g[m].y;
                CHECK_THAT(got, WithinRel(fd, 1e-5) || WithinAbs(fd, 1e-8));
            }
        }
    }
}

TEST_CASE("kr_gradient symmetries", "[point_vortex]") {
    const auto g0 = kr_gradient({{{0.0, 0.0}}, {1.3}});
    CHECK(norm(g0[0]) == 0.0);

    // mirror-symmetric dipole about the x-axis: gradients mirror too
    const PointVortexSystem sys{{{0.4, 0.25}, {0.4, -0.25}}, {1.0, -1.0}};
    const auto g = kr_gradient(sys);
    CHECK_THAT(g[0].x, WithinAbs(g[1].x, 1e-13));
    CHECK_THAT(g[0].y, WithinAbs(-g[1].y, 1e-13));
}

TEST_CASE("kr_local_min single vortex converges to the center", "[point_vortex]") {
    const KRPoint kr = kr_local_min({{{0.3, 0.2}}, {1.0}}, 0.5);
    CHECK(norm(kr.positions[0]) < 1e-6);
    CHECK(kr.gradient_norm < 1e-8);
    CHECK(kr.hessian_pd);
    CHECK(kr.hessian_pd_mod_rotation);

    // seed already at the minimum: returns after the gradient check alone
    const KRPoint again = kr_local_min({kr.positions, {1.0}}, 0.5);
    CHECK(again.iterations == 0);
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(dist(again.positions[0], kr.positions[0]) < 1e-10);
}

TEST_CASE("kr_local_min dipole reaches the antipodal pair", "[point_vortex]") {
    const KRPoint kr = kr_local_min({{{0.3, 0.0}, {-0.3, 0.0}}, {1.0, -1.0}}, 0.25);
    CHECK(kr.gradient_norm < 1e-8);

    // golden separation from the slice scan (equals sqrt(sqrt(5)-2) per
    // the first-order condition on the diameter slice)
    const double a_scan = dipole_slice_minimum();
    CHECK_THAT(a_scan, WithinAbs(0.48586827175664576, 1e-6));
    CHECK_THAT(dist(kr.positions[0], kr.positions[1]), WithinAbs(2.0 * a_scan, 1e-6));
    CHECK_THAT(kr.positions[0].y, WithinAbs(0.0, 1e-8));
    CHECK_THAT(kr.positions[1].y, WithinAbs(0.0, 1e-8));

    // the disk's rotational symmetry leaves one exact zero mode, so the
    // full-space probe must honestly fail while the deflated one passes
    CHECK_FALSE(kr.hessian_pd);
    CHECK(kr.hessian_pd_mod_rotation);
    REQUIRE(kr.hessian_eigenvalues.size() == 4);
    CHECK_THAT(kr.hessian_eigenvalues[0], WithinAbs(0.0, 1e-5));
    CHECK_THAT(kr.hessian_eigenvalues[1], WithinAbs(0.2575, 2e-3));
    CHECK_THAT(kr.hessian_eigenvalues[2], WithinAbs(0.4167, 2e-3));
    CHECK_THAT(kr.hessian_eigenvalues[3], WithinAbs(1.5075, 2e-3));

    // fixed point of the optimizer
    const KRPoint again = kr_local_min({kr.positions, {1.0, -1.0}}, 0.25);
    CHECK(dist(again.positions[0], kr.positions[0]) < 1e-10);
    CHECK(dist(again.positions[1], kr.positions[1]) < 1e-10);
}

TEST_CASE("kr_local_min reports a pinned search boundary", "[point_vortex]") {
    CHECK_THROWS_AS(kr_local_min({{{0.5, 0.0}}, {1.0}}, 0.05), ConvergenceError);
}

TEST_CASE("pv_rhs_bounded closed forms", "[point_vortex]") {
    const auto r0 = pv_rhs_bounded({{{0.0, 0.0}}, {2.0}});
    CHECK(norm(r0[0]) == 0.0);

    const double kappa = 1.4;
    const auto r = pv_rhs_bounded({{{0.5, 0.0}}, {kappa}});
    CHECK_THAT(norm(r[0]), WithinRel(kappa / (2.0 * pi) * 0.5 / 0.75, 1e-13));
    CHECK_THAT(dot(r[0], Vec2{1.0, 0.0}), WithinAbs(0.0, 1e-14)); // tangential
}

TEST_CASE("pv_rhs_plane closed forms", "[point_vortex]") {
    const PointVortexSystem pair{{{0.5, 0.0}, {-0.5, 0.0}}, {1.0, 1.0}};
    const auto r = pv_rhs_plane(pair);
    CHECK_THAT(norm(r[0]), WithinRel(1.0 / (2.0 * pi), 1e-14));
    CHECK_THAT(norm(r[1]), WithinRel(1.0 / (2.0 * pi), 1e-14));

    const PointVortexSystem dipole{{{0.5, 0.0}, {-0.5, 0.0}}, {1.0, -1.0}};
    const auto d = pv_rhs_plane(dipole);
    CHECK(dist(d[0], d[1]) < 1e-12); // translating pair
}

TEST_CASE("co-rotating pair returns after one period", "[point_vortex]") {
    const double d = 1.0;
    const double T = 2.0 * pi * pi * d * d;
    const PointVortexSystem pair{{{d / 2.0, 0.0}, {-d / 2.0, 0.0}}, {1.0, 1.0}};
    const Trajectory traj = integrate_pv(pair, PvModel::plane, T / 2000.0, T);
    const auto& end = traj.states.back();
    CHECK(dist(end[0], pair.positions[0]) < 1e-4);
    CHECK(dist(end[1], pair.positions[1]) < 1e-4);

    // fourth-order convergence: halving dt shrinks the return error ~16x
    const double e1 = dist(integrate_pv(pair, PvModel::plane, T / 2000.0, T).states.back()[0],
                           pair.positions[0]);
    const double e2 = dist(integrate_pv(pair, PvModel::plane, T / 4000.0, T).states.back()[0],
                           pair.positions[0]);
    CAPTURE(e1, e2);
    CHECK(e1 / e2 > 10.0);
    CHECK(e1 / e2 < 24.0);
}

TEST_CASE("plane center of vorticity is conserved", "[point_vortex]") {
    const PointVortexSystem sys{{{0.4, 0.1}, {-0.3, 0.2}, {0.0, -0.45}}, {1.0, 2.0, -0.5}};
    const Trajectory traj = integrate_pv(sys, PvModel::plane, 1e-2, 10.0);
    Vec2 m0{0, 0}, m1{0, 0};
    for (std::size_t i = 0; i < sys.size(); ++i) {
        m0 += sys.strengths[i] * traj.states.front()[i];
        m1 += sys.strengths[i] * traj.states.back()[i];
    }
    CHECK(dist(m0, m1) < 1e-8);
}

TEST_CASE("bounded flow conserves the Kirchhoff-Routh hamiltonian", "[point_vortex]") {
    const PointVortexSystem two{{{0.4, 0.0}, {-0.35, 0.1}}, {1.0, 0.8}};
    const PointVortexSystem three{{{0.4, 0.0}, {-0.3, 0.25}, {0.05, -0.4}}, {1.0, -0.7, 1.2}};
    for (const auto& sys : {two, three}) {
        const Trajectory traj = integrate_pv(sys, PvModel::disk, 1e-3, 10.0);
        const double k0 = kr_value({traj.states.front(), sys.strengths});
        double worst = 0.0;
        for (std::size_t s = 0; s < traj.states.size(); s += 100) {
            const double kt = kr_value({traj.states[s], sys.strengths});
            worst = std::max(worst, std::abs(kt - k0) / std::abs(k0));
        }
        const double kend = kr_value({traj.states.back(), sys.strengths});
        worst = std::max(worst, std::abs(kend - k0) / std::abs(k0));
        CAPTURE(worst);
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("stationary single vortex stays put", "[point_vortex]") {
    const Trajectory traj = integrate_pv({{{0.0, 0.0}}, {1.0}}, PvModel::disk, 1e-2, 1.0);
    for (const auto& st : traj.states) CHECK(norm(st[0]) == 0.0);
}

TEST_CASE("integrator aborts on collision and domain exit", "[point_vortex]") {
    const PointVortexSystem close{{{0.0, 0.0}, {5e-7, 0.0}}, {1.0, 1.0}};
    CHECK_THROWS_AS(integrate_pv(close, PvModel::plane, 1e-4, 0.1), NumericalError);

    const PointVortexSystem near_edge{{{0.9, 0.0}}, {5.0}};
    CHECK_THROWS_AS(integrate_pv(near_edge, PvModel::disk, 10.0, 20.0), NumericalError);
}
