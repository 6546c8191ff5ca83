#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "vwpatch/errors.hpp"
#include "vwpatch/geometry.hpp"
#include "vwpatch/kernels.hpp"
#include "vwpatch/linalg.hpp"

namespace vwp {

inline constexpr double kMinVortexSeparation = 1e-8;
inline constexpr double kBoundaryProximity = 1e-6;

struct PointVortexSystem {
    std::vector<Vec2> positions;
    std::vector<double> strengths;

    std::size_t size() const { return positions.size(); }

    void validate(bool bounded = true) const {
        if (positions.size() != strengths.size() || positions.empty())
            throw ValidationError("PointVortexSystem: positions/strengths size mismatch");
        for (double k : strengths)
            if (k == 0.0) throw ValidationError("PointVortexSystem: zero strength");
        for (std::size_t i = 0; i < positions.size(); ++i)
            for (std::size_t j = i + 1; j < positions.size(); ++j)
                if (dist(positions[i], positions[j]) < kMinVortexSeparation)
                    throw NumericalError("PointVortexSystem: coincident vortices");
        if (bounded) {
            for (const Vec2& p : positions)
                if (1.0 - norm(p) < kBoundaryProximity)
                    throw NumericalError("PointVortexSystem: vortex too close to the boundary");
        }
    }
};

// K_k(x_1..x_k) = -sum_{i != j} kappa_i kappa_j G(x_i,x_j)
//                 + sum_i kappa_i^2 h(x_i,x_i),
// with the first sum over ordered pairs, so K_1 = 2 kappa^2 H.
inline double kr_value(const PointVortexSystem& sys) {
    sys.validate();
    const std::size_t k = sys.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            acc -= sys.strengths[i] * sys.strengths[j] *
                   green_disk(sys.positions[i], sys.positions[j]);
        }
        acc += sys.strengths[i] * sys.strengths[i] *
               robin_h(sys.positions[i], sys.positions[i]);
    }
    return acc;
}

inline std::vector<Vec2> kr_gradient(const PointVortexSystem& sys) {
    sys.validate();
    const std::size_t k = sys.size();
    std::vector<Vec2> g(k);
    for (std::size_t m = 0; m < k; ++m) {
        Vec2 acc = sys.strengths[m] * grad_H(sys.positions[m]);
        for (std::size_t j = 0; j < k; ++j) {
            if (j == m) continue;
            acc -= sys.strengths[j] * grad_green_disk(sys.positions[m], sys.positions[j]);
        }
        g[m] = 2.0 * sys.strengths[m] * acc;
    }
    return g;
}

struct KRPoint {
    std::vector<Vec2> positions;
    double value = 0.0;
    double gradient_norm = 0.0;
    bool hessian_pd = false;            // full-space probe, margin 1e-6
    bool hessian_pd_mod_rotation = false; // PD orthogonal to the rotation mode
    std::vector<double> hessian_eigenvalues;
    int iterations = 0;
};

struct KRMinOptions {
    double gradient_tol = 1e-8;
    int max_iterations = 20000;
    double hessian_step = 1e-4;
    double hessian_margin = 1e-6;
};

namespace detail {

inline double kr_value_at(const std::vector<double>& strengths, const std::vector<Vec2>& pos) {
    return kr_value(PointVortexSystem{pos, strengths});
}

// Central-difference Hessian of K_k; step per the probe contract.
inline std::vector<double> kr_hessian_fd(const std::vector<double>& strengths,
                                         const std::vector<Vec2>& pos, double step) {
    const int n = static_cast<int>(pos.size()) * 2;
    auto shifted = [&](int a, double sa, int b, double sb) {
        std::vector<Vec2> q = pos;
        auto bump = [&](int c, double s) {
            if (c % 2 == 0) q[c / 2].x += s; else q[c / 2].y += s;
        };
        bump(a, sa);
        if (b >= 0) bump(b, sb);
        return kr_value_at(strengths, q);
    };
    std::vector<double> H(static_cast<std::size_t>(n) * n, 0.0);
    const double f0 = kr_value_at(strengths, pos);
    for (int a = 0; a < n; ++a) {
        H[static_cast<std::size_t>(a) * n + a] =
            (shifted(a, step, -1, 0.0) - 2.0 * f0 + shifted(a, -step, -1, 0.0)) / (step * step);
        for (int b = a + 1; b < n; ++b) {
            const double v = (shifted(a, step, b, step) - shifted(a, step, b, -step) -
                              shifted(a, -step, b, step) + shifted(a, -step, b, -step)) /
                             (4.0 * step * step);
            H[static_cast<std::size_t>(a) * n + b] = v;
            H[static_cast<std::size_t>(b) * n + a] = v;
        }
    }
    return H;
}

// Rayleigh quotient of the finite-difference Hessian along the rigid
// rotation generator (J x_1, ..., J x_k); the disk makes this an exact
// zero mode of K_k at any critical point, so PD is also probed on its
// orthogonal complement via a deflated matrix.
inline std::vector<double> deflate_rotation_mode(std::vector<double> H,
                                                 const std::vector<Vec2>& pos) {
    const int n = static_cast<int>(pos.size()) * 2;
    std::vector<double> v(n);
    double nv = 0.0;
    for (std::size_t i = 0; i < pos.size(); ++i) {
        const Vec2 r = rot_cw(pos[i]);
        v[2 * i] = r.x;
        v[2 * i + 1] = r.y;
        nv += norm2(r);
    }
    nv = std::sqrt(nv);
    if (nv < 1e-14) return H;
    for (double& c : v) c /= nv;
    // P H P with P = I - v v^T
    auto idx = [n](int i, int j) { return static_cast<std::size_t>(i) * n + j; };
    std::vector<double> Hv(n, 0.0);
    double vHv = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) Hv[i] += H[idx(i, j)] * v[j];
        vHv += v[i] * Hv[i];
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            H[idx(i, j)] += -v[i] * Hv[j] - Hv[i] * v[j] + vHv * v[i] * v[j];
    return H;
}

} // namespace detail

// Damped projected gradient descent with Armijo backtracking (shrink 0.5,
// slope 1e-4), each position constrained to the closed ball of
// search_radius around its seed. The search geometry must keep iterates
// interior and separated; that is validated up front.
inline KRPoint kr_local_min(const PointVortexSystem& seed, double search_radius,
                            const KRMinOptions& opts = {}) {
    seed.validate();
    if (!(search_radius > 0.0))
        throw ValidationError("kr_local_min: search_radius must be positive");
    const std::size_t k = seed.size();
    for (std::size_t i = 0; i < k; ++i) {
        if (1.0 - norm(seed.positions[i]) <= search_radius + kBoundaryProximity)
            throw ValidationError("kr_local_min: search ball reaches the boundary");
        for (std::size_t j = i + 1; j < k; ++j)
            if (dist(seed.positions[i], seed.positions[j]) <=
                2.0 * search_radius + kMinVortexSeparation)
                throw ValidationError("kr_local_min: search balls overlap");
    }

    auto project = [&](std::vector<Vec2> q) {
        for (std::size_t i = 0; i < k; ++i) {
            const Vec2 d = q[i] - seed.positions[i];
            const double r = norm(d);
            if (r > search_radius) q[i] = seed.positions[i] + d * (search_radius / r);
        }
        return q;
    };

    std::vector<Vec2> x = seed.positions;
    double fx = detail::kr_value_at(seed.strengths, x);
    double step = 1.0;
    int iter = 0;
    double gnorm = 0.0;
    for (; iter < opts.max_iterations; ++iter) {
        const std::vector<Vec2> g = kr_gradient(PointVortexSystem{x, seed.strengths});
        double g2 = 0.0;
        for (const Vec2& gi : g) g2 += norm2(gi);
        gnorm = std::sqrt(g2);
        if (gnorm < opts.gradient_tol) break;

        bool moved = false;
        for (double t = step; t > 1e-18; t *= 0.5) {
            std::vector<Vec2> trial = x;
            for (std::size_t i = 0; i < k; ++i) trial[i] -= g[i] * t;
            trial = project(std::move(trial));
            double move2 = 0.0;
            for (std::size_t i = 0; i < k; ++i) move2 += norm2(trial[i] - x[i]);
            if (move2 == 0.0) break;
            double ft;
            try {
                ft = detail::kr_value_at(seed.strengths, trial);
            } catch (const NumericalError&) {
                continue; // collision along the trial: shrink
            }
            if (ft <= fx - 1e-4 * move2 / t) {
                x = std::move(trial);
                fx = ft;
                step = std::min(4.0 * t, 1e6);
                moved = true;
                break;
            }
        }
        if (!moved) {
            bool at_boundary = false;
            for (std::size_t i = 0; i < k; ++i)
                if (norm(x[i] - seed.positions[i]) > search_radius - 1e-12) at_boundary = true;
            if (at_boundary)
                throw ConvergenceError(
                    "kr_local_min: minimizer pinned to the search-radius boundary");
            break; // numerically stationary
        }
    }
    if (iter >= opts.max_iterations)
        throw ConvergenceError("kr_local_min: no convergence within max iterations");

    KRPoint out;
    out.positions = x;
    out.value = fx;
    out.iterations = iter;
    {
        const std::vector<Vec2> g = kr_gradient(PointVortexSystem{x, seed.strengths});
        double g2 = 0.0;
        for (const Vec2& gi : g) g2 += norm2(gi);
        out.gradient_norm = std::sqrt(g2);
    }
    if (out.gradient_norm >= opts.gradient_tol) {
        bool at_boundary = false;
        for (std::size_t i = 0; i < k; ++i)
            if (norm(x[i] - seed.positions[i]) > search_radius - 1e-12) at_boundary = true;
        if (at_boundary)
            throw ConvergenceError("kr_local_min: minimizer pinned to the search-radius boundary");
    }

    const std::vector<double> H =
        detail::kr_hessian_fd(seed.strengths, x, opts.hessian_step);
    const int dim = static_cast<int>(2 * k);
    out.hessian_eigenvalues = symmetric_eigenvalues(H, dim);
    out.hessian_pd = out.hessian_eigenvalues.front() > opts.hessian_margin;
    if (k >= 2) {
        const auto deflated = symmetric_eigenvalues(detail::deflate_rotation_mode(H, x), dim);
        // deflation leaves one exact zero; require the rest above margin
        out.hessian_pd_mod_rotation = deflated[1] > opts.hessian_margin;
    } else {
        out.hessian_pd_mod_rotation = out.hessian_pd;
    }
    return out;
}

// dx_i/dt = -kappa_i J grad H(x_i) + sum_{j != i} kappa_j J grad_{x_i} G(x_j, x_i)
inline std::vector<Vec2> pv_rhs_bounded(const PointVortexSystem& sys) {
    sys.validate();
    const std::size_t k = sys.size();
    std::vector<Vec2> rhs(k);
    for (std::size_t i = 0; i < k; ++i) {
        Vec2 v = -sys.strengths[i] * grad_H(sys.positions[i]);
        for (std::size_t j = 0; j < k; ++j) {
            if (j == i) continue;
            // grad in the second argument of G equals grad_green_disk with
            // the arguments swapped (G symmetric)
            v += sys.strengths[j] * grad_green_disk(sys.positions[i], sys.positions[j]);
        }
        rhs[i] = rot_cw(v);
    }
    return rhs;
}

// Whole-plane model: dx_i/dt = sum_{j != i} kappa_j K(x_i - x_j)
inline std::vector<Vec2> pv_rhs_plane(const PointVortexSystem& sys) {
    sys.validate(false);
    const std::size_t k = sys.size();
    std::vector<Vec2> rhs(k);
    for (std::size_t i = 0; i < k; ++i) {
        Vec2 v{0.0, 0.0};
        for (std::size_t j = 0; j < k; ++j) {
            if (j == i) continue;
            v += sys.strengths[j] * biot_savart_K(sys.positions[i] - sys.positions[j]);
        }
        rhs[i] = v;
    }
    return rhs;
}

enum class PvModel { disk, plane };

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<Vec2>> states; // one position vector per sample
    std::vector<double> strengths;
};

inline constexpr double kCollisionDistance = 1e-6;

// Classical RK4, sampled every step. Aborts on collision or (bounded
// case) domain exit.
inline Trajectory integrate_pv(const PointVortexSystem& sys, PvModel model, double dt,
                               double t_end) {
    if (!(dt > 0.0)) throw ValidationError("integrate_pv: dt must be positive");
    if (t_end < 0.0) throw ValidationError("integrate_pv: t_end must be nonnegative");
    sys.validate(model == PvModel::disk);

    auto rhs = [&](const std::vector<Vec2>& pos) {
        PointVortexSystem s{pos, sys.strengths};
        return model == PvModel::disk ? pv_rhs_bounded(s) : pv_rhs_plane(s);
    };
    auto check_state = [&](const std::vector<Vec2>& pos) {
        for (std::size_t i = 0; i < pos.size(); ++i)
            for (std::size_t j = i + 1; j < pos.size(); ++j)
                if (dist(pos[i], pos[j]) < kCollisionDistance)
                    throw NumericalError("integrate_pv: vortex collision");
        if (model == PvModel::disk)
            for (const Vec2& p : pos)
                if (norm2(p) >= 1.0) throw NumericalError("integrate_pv: vortex left the disk");
    };

    const std::size_t k = sys.size();
    const long nsteps = std::lround(t_end / dt);
    Trajectory traj;
    traj.strengths = sys.strengths;
    traj.times.reserve(nsteps + 1);
    traj.states.reserve(nsteps + 1);
    std::vector<Vec2> x = sys.positions;
    traj.times.push_back(0.0);
    traj.states.push_back(x);
    for (long s = 1; s <= nsteps; ++s) {
        const std::vector<Vec2> k1 = rhs(x);
        std::vector<Vec2> tmp(k);
        for (std::size_t i = 0; i < k; ++i) tmp[i] = x[i] + k1[i] * (dt / 2.0);
        const std::vector<Vec2> k2 = rhs(tmp);
        for (std::size_t i = 0; i < k; ++i) tmp[i] = x[i] + k2[i] * (dt / 2.0);
        const std::vector<Vec2> k3 = rhs(tmp);
        for (std::size_t i = 0; i < k; ++i) tmp[i] = x[i] + k3[i] * dt;
        const std::vector<Vec2> k4 = rhs(tmp);
        for (std::size_t i = 0; i < k; ++i)
            x[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0);
        check_state(x);
        traj.times.push_back(static_cast<double>(s) * dt);
        traj.states.push_back(x);
    }
    return traj;
}

} // namespace vwp
