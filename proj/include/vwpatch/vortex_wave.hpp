#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "vwpatch/errors.hpp"
#include "vwpatch/geometry.hpp"
#include "vwpatch/kernels.hpp"
#include "vwpatch/patch.hpp"

namespace vwp {

// Coupled motion of the background vorticity (one particle per occupied
// grid cell, circulation sgn(kappa_i) lambda h^2) and the point vortices.
// Particles move in the field of every other particle and all points;
// each point's own singular term is replaced by its -kappa J grad H image
// drift. No core smoothing: the coincidence guard below is the only
// regularization.

inline constexpr double kBlobCoincidence = 1e-10;

struct BlobCoincidenceError : NumericalError {
    using NumericalError::NumericalError;
};

struct BlobEnsemble {
    std::vector<Vec2> particle_pos;
    std::vector<double> particle_circ;
    std::vector<int> particle_patch; // originating patch of each particle
    std::vector<Vec2> point_pos;
    std::vector<double> point_str;
    double time = 0.0;
    int n_patches = 0;
};

inline BlobEnsemble discretize(const PatchSolution& sol) {
    const PatchProblem& pb = sol.problem;
    BlobEnsemble ens;
    ens.n_patches = pb.p;
    const double h2 = sol.grid->cell_area();
    for (int i = 0; i < pb.p; ++i) {
        if (sol.cells[i].empty()) throw ValidationError("discretize: empty patch");
        const double circ = (pb.strengths[i] > 0 ? 1.0 : -1.0) * pb.lambda * h2;
        for (int c : sol.cells[i]) {
            ens.particle_pos.push_back(sol.grid->center_of(c));
            ens.particle_circ.push_back(circ);
            ens.particle_patch.push_back(i);
        }
    }
    ens.point_pos = sol.points;
    ens.point_str.assign(pb.strengths.begin() + pb.p, pb.strengths.end());
    return ens;
}

// u(x) = sum_q Gamma_q J grad_x G(q,x) + sum_j kappa_j J grad_x G(x_j,x),
// with the excluded point's term replaced by -kappa_j J grad H(x).
inline Vec2 ensemble_velocity(const BlobEnsemble& ens, Vec2 x, int exclude_particle = -1,
                              int exclude_point = -1) {
    if (!(norm2(x) < 1.0)) throw NumericalError("ensemble_velocity: point left the disk");
    Vec2 g{0.0, 0.0};
    for (std::size_t q = 0; q < ens.particle_pos.size(); ++q) {
        if (static_cast<int>(q) == exclude_particle) continue;
        if (dist(ens.particle_pos[q], x) < kBlobCoincidence)
            throw BlobCoincidenceError("ensemble_velocity: particle coincides with target");
        g += ens.particle_circ[q] * grad_green_disk(x, ens.particle_pos[q]);
    }
    for (std::size_t j = 0; j < ens.point_pos.size(); ++j) {
        if (static_cast<int>(j) == exclude_point) {
            g -= ens.point_str[j] * grad_H(x);
            continue;
        }
        if (dist(ens.point_pos[j], x) < kBlobCoincidence)
            throw BlobCoincidenceError("ensemble_velocity: point vortex coincides with target");
        g += ens.point_str[j] * grad_green_disk(x, ens.point_pos[j]);
    }
    return rot_cw(g);
}

namespace detail {

struct EnsembleRhs {
    std::vector<Vec2> particle_vel;
    std::vector<Vec2> point_vel;
};

inline EnsembleRhs ensemble_rhs(const BlobEnsemble& ens) {
    for (const Vec2& p : ens.particle_pos)
        if (!(norm2(p) < 1.0)) throw NumericalError("vortex-wave step: particle left the disk");
    for (const Vec2& p : ens.point_pos)
        if (!(norm2(p) < 1.0))
            throw NumericalError("vortex-wave step: point vortex left the disk");
    EnsembleRhs r;
    r.particle_vel.resize(ens.particle_pos.size());
    r.point_vel.resize(ens.point_pos.size());
    for (std::size_t q = 0; q < ens.particle_pos.size(); ++q)
        r.particle_vel[q] =
            ensemble_velocity(ens, ens.particle_pos[q], static_cast<int>(q), -1);
    for (std::size_t j = 0; j < ens.point_pos.size(); ++j)
        r.point_vel[j] = ensemble_velocity(ens, ens.point_pos[j], -1, static_cast<int>(j));
    return r;
}

inline BlobEnsemble advanced(const BlobEnsemble& base, const EnsembleRhs& rhs, double dt) {
    BlobEnsemble out = base;
    for (std::size_t q = 0; q < out.particle_pos.size(); ++q)
        out.particle_pos[q] += rhs.particle_vel[q] * dt;
    for (std::size_t j = 0; j < out.point_pos.size(); ++j)
        out.point_pos[j] += rhs.point_vel[j] * dt;
    return out;
}

} // namespace detail

// One RK4 step; dt may be negative (back-integration), dt = 0 is the
// identity. Circulations are never rescaled.
inline BlobEnsemble step(const BlobEnsemble& ens, double dt) {
    if (dt == 0.0) return ens;
    const auto k1 = detail::ensemble_rhs(ens);
    const auto k2 = detail::ensemble_rhs(detail::advanced(ens, k1, dt / 2.0));
    const auto k3 = detail::ensemble_rhs(detail::advanced(ens, k2, dt / 2.0));
    const auto k4 = detail::ensemble_rhs(detail::advanced(ens, k3, dt));
    BlobEnsemble out = ens;
    for (std::size_t q = 0; q < out.particle_pos.size(); ++q)
        out.particle_pos[q] += (k1.particle_vel[q] + 2.0 * k2.particle_vel[q] +
                                2.0 * k3.particle_vel[q] + k4.particle_vel[q]) *
                               (dt / 6.0);
    for (std::size_t j = 0; j < out.point_pos.size(); ++j)
        out.point_pos[j] += (k1.point_vel[j] + 2.0 * k2.point_vel[j] + 2.0 * k3.point_vel[j] +
                             k4.point_vel[j]) *
                            (dt / 6.0);
    for (const Vec2& p : out.particle_pos)
        if (!(norm2(p) < 1.0)) throw NumericalError("vortex-wave step: particle left the disk");
    for (const Vec2& p : out.point_pos)
        if (!(norm2(p) < 1.0))
            throw NumericalError("vortex-wave step: point vortex left the disk");
    out.time = ens.time + dt;
    return out;
}

// Conserved interaction energy of the blob system: pairwise particle and
// point G-interactions plus the point image terms; no particle
// self-energy and no particle image term, matching the velocity rule.
inline double ensemble_energy(const BlobEnsemble& ens) {
    double e = 0.0;
    for (std::size_t a = 0; a < ens.particle_pos.size(); ++a)
        for (std::size_t b = a + 1; b < ens.particle_pos.size(); ++b)
            e += ens.particle_circ[a] * ens.particle_circ[b] *
                 green_disk(ens.particle_pos[a], ens.particle_pos[b]);
    for (std::size_t a = 0; a < ens.particle_pos.size(); ++a)
        for (std::size_t j = 0; j < ens.point_pos.size(); ++j)
            e += ens.particle_circ[a] * ens.point_str[j] *
                 green_disk(ens.particle_pos[a], ens.point_pos[j]);
    for (std::size_t i = 0; i < ens.point_pos.size(); ++i) {
        for (std::size_t j = i + 1; j < ens.point_pos.size(); ++j)
            e += ens.point_str[i] * ens.point_str[j] *
                 green_disk(ens.point_pos[i], ens.point_pos[j]);
        e -= ens.point_str[i] * ens.point_str[i] * robin_H(ens.point_pos[i]);
    }
    return e;
}

inline std::vector<Vec2> patch_centroids(const BlobEnsemble& ens) {
    std::vector<Vec2> acc(ens.n_patches, Vec2{0.0, 0.0});
    std::vector<double> tot(ens.n_patches, 0.0);
    for (std::size_t q = 0; q < ens.particle_pos.size(); ++q) {
        acc[ens.particle_patch[q]] += ens.particle_pos[q] * ens.particle_circ[q];
        tot[ens.particle_patch[q]] += ens.particle_circ[q];
    }
    for (int i = 0; i < ens.n_patches; ++i) acc[i] = acc[i] / tot[i];
    return acc;
}

inline std::vector<double> patch_diameters(const BlobEnsemble& ens) {
    std::vector<double> out(ens.n_patches, 0.0);
    for (std::size_t a = 0; a < ens.particle_pos.size(); ++a)
        for (std::size_t b = a + 1; b < ens.particle_pos.size(); ++b)
            if (ens.particle_patch[a] == ens.particle_patch[b])
                out[ens.particle_patch[a]] = std::max(
                    out[ens.particle_patch[a]], dist(ens.particle_pos[a], ens.particle_pos[b]));
    return out;
}

// self-rotation time scale 2 pi diam^2 / |kappa| of the slowest patch
inline double turnover_time(const PatchSolution& sol) {
    double t = 0.0;
    for (int i = 0; i < sol.problem.p; ++i)
        t = std::max(t, 2.0 * std::numbers::pi * sol.diameters[i] * sol.diameters[i] /
                            std::abs(sol.problem.strengths[i]));
    return t;
}

struct DriftCore {
    std::vector<double> centroid_drift;
    std::vector<double> diameter_change;
    std::vector<double> point_displacement;
    double energy_drift_rel = 0.0;
};

struct SimulationSnapshot {
    double t = 0.0;
    std::vector<Vec2> centroids;
    std::vector<double> diameters;
    std::vector<Vec2> points;
};

struct DriftReport {
    DriftCore steady;
    std::optional<DriftCore> control; // points displaced by 3 diam(A_1)
    double t_end = 0.0;
    double dt = 0.0;
    int restarts = 0; // coincidence-guard dt halvings
    std::vector<SimulationSnapshot> snapshots;
};

namespace detail {

inline DriftCore run_drift(const BlobEnsemble& start, double t_end, double dt,
                           std::vector<SimulationSnapshot>* snaps, int sample_every) {
    BlobEnsemble ens = start;
    const std::vector<Vec2> c0 = patch_centroids(ens);
    const std::vector<double> d0 = patch_diameters(ens);
    const std::vector<Vec2> p0 = ens.point_pos;
    const double e0 = ensemble_energy(ens);
    const long nsteps = std::lround(t_end / dt);
    auto snapshot = [&](long s) {
        if (!snaps || (s % sample_every != 0 && s != nsteps)) return;
        SimulationSnapshot sn;
        sn.t = ens.time;
        sn.centroids = patch_centroids(ens);
        sn.diameters = patch_diameters(ens);
        sn.points = ens.point_pos;
        snaps->push_back(std::move(sn));
    };
    snapshot(0);
    for (long s = 1; s <= nsteps; ++s) {
        ens = step(ens, dt);
        snapshot(s);
    }
    DriftCore out;
    const std::vector<Vec2> c1 = patch_centroids(ens);
    const std::vector<double> d1 = patch_diameters(ens);
    for (int i = 0; i < ens.n_patches; ++i) {
        out.centroid_drift.push_back(dist(c1[i], c0[i]));
        out.diameter_change.push_back(std::abs(d1[i] - d0[i]));
    }
    for (std::size_t j = 0; j < ens.point_pos.size(); ++j)
        out.point_displacement.push_back(dist(ens.point_pos[j], p0[j]));
    out.energy_drift_rel = std::abs(ensemble_energy(ens) - e0) / std::max(std::abs(e0), 1e-30);
    return out;
}

} // namespace detail

// Integrate the discretized solution over t_end and report how steady it
// is; the control run displaces every point vortex toward the origin by
// 3 diam(A_1) and is integrated identically. A coincidence-guard trip
// halves dt and restarts (reported).
inline DriftReport simulate_steadiness(const PatchSolution& sol, double t_end, double dt,
                                       bool with_control = true, int sample_every = 0) {
    if (!(dt > 0.0) || !(t_end > 0.0))
        throw ValidationError("simulate_steadiness: need positive dt and t_end");
    const BlobEnsemble base = discretize(sol);

    DriftReport rep;
    rep.t_end = t_end;
    for (int attempt = 0;; ++attempt) {
        try {
            rep.dt = dt;
            const long nsteps = std::lround(t_end / dt);
            const int every =
                sample_every > 0 ? sample_every : static_cast<int>(std::max(1L, nsteps / 200));
            rep.snapshots.clear();
            rep.steady = detail::run_drift(base, t_end, dt, &rep.snapshots, every);
            if (with_control && !base.point_pos.empty()) {
                BlobEnsemble ctrl = base;
                const double shift = 3.0 * sol.diameters[0];
                for (Vec2& x : ctrl.point_pos) {
                    const double r = norm(x);
                    const Vec2 dir = r > 1e-12 ? x / (-r) : Vec2{1.0, 0.0};
                    x += dir * shift;
                    if (!(norm2(x) < 1.0))
                        throw ValidationError("simulate_steadiness: control displacement left the disk");
                }
                rep.control = detail::run_drift(ctrl, t_end, dt, nullptr, every);
            }
            return rep;
        } catch (const BlobCoincidenceError&) {
            if (attempt >= 3) throw;
            dt *= 0.5;
            ++rep.restarts;
        }
    }
}

} // namespace vwp
