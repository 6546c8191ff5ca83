#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "vwpatch/errors.hpp"
#include "vwpatch/geometry.hpp"
#include "vwpatch/grid.hpp"
#include "vwpatch/kernels.hpp"
#include "vwpatch/poisson.hpp"

namespace vwp {

// Maximization of
//   E(omega) + sum_j kappa_j psi(x_j) + (1/2) sum_{i != j} kappa_i kappa_j G(x_i,x_j)
//            - sum_j kappa_j^2 H(x_j)
// over bang-bang vorticities confined to balls around the patch seeds and
// point positions confined to balls around the point seeds, by alternating
// a bathtub rearrangement of each patch with one projected ascent pass per
// point vortex.

struct PatchProblem {
    std::vector<double> strengths; // k values; patches 0..p-1, points p..k-1
    int p = 0;
    std::vector<Vec2> seeds;       // k seed positions
    double delta = 0.0;            // confinement radius (0 = auto)
    double delta0 = 0.0;           // outer radius (0 = auto, 2*delta)
    double lambda = 0.0;
    int grid_n = 0;
    double domain_radius = 1.0;
    double point_tol = 1e-6;
    double threshold_tol = 1e-10;
    int max_outer = 500;
    int min_patch_cells = 8;
    std::vector<Vec2> point_starts; // optional warm start, empty = seeds

    int k() const { return static_cast<int>(strengths.size()); }
    int l() const { return k() - p; }
    double epsilon(int i) const {
        return std::sqrt(std::abs(strengths[i]) / (lambda * std::numbers::pi));
    }

    // delta default: min(0.25 * min pairwise seed distance,
    //                    0.25 * min boundary clearance); delta0 = 2*delta.
    void resolve_radii() {
        if (delta > 0.0 && delta0 > 0.0) return;
        double min_pair = std::numeric_limits<double>::infinity();
        double min_clear = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            min_clear = std::min(min_clear, domain_radius - norm(seeds[i]));
            for (std::size_t j = i + 1; j < seeds.size(); ++j)
                min_pair = std::min(min_pair, dist(seeds[i], seeds[j]));
        }
        if (delta <= 0.0) delta = 0.25 * std::min(min_pair, min_clear);
        if (delta0 <= 0.0) delta0 = 2.0 * delta;
    }

    void validate() const {
        const int kk = k();
        if (kk < 1 || static_cast<int>(seeds.size()) != kk)
            throw ValidationError("PatchProblem: strengths/seeds size mismatch");
        if (p < 1 || p > kk)
            throw ValidationError("PatchProblem: split index p must satisfy 1 <= p <= k");
        for (double s : strengths)
            if (s == 0.0 || !std::isfinite(s))
                throw ValidationError("PatchProblem: strengths must be nonzero and finite");
        if (!(lambda > 0.0)) throw ValidationError("PatchProblem: lambda must be positive");
        if (grid_n < 16) throw ValidationError("PatchProblem: grid_n must be at least 16");
        if (!(delta > 0.0) || !(delta0 > 0.0) || delta > delta0 / 2.0 + 1e-15)
            throw ValidationError("PatchProblem: need 0 < delta <= delta0/2");
        for (int i = 0; i < kk; ++i) {
            if (domain_radius - norm(seeds[i]) <= delta0)
                throw ValidationError("PatchProblem: ball B_delta0 leaves the domain");
            for (int j = i + 1; j < kk; ++j)
                if (dist(seeds[i], seeds[j]) <= 2.0 * delta0)
                    throw ValidationError("PatchProblem: delta0 balls overlap");
        }
        for (int i = 0; i < p; ++i)
            if (std::abs(strengths[i]) / lambda >
                std::numbers::pi * delta * delta + 1e-15)
                throw ValidationError("PatchProblem: patch area exceeds its confinement ball");
        if (point_tol <= 0.0 || threshold_tol <= 0.0 || max_outer < 1 || min_patch_cells < 1)
            throw ValidationError("PatchProblem: bad tolerances");
        if (!point_starts.empty()) {
            if (static_cast<int>(point_starts.size()) != l())
                throw ValidationError("PatchProblem: point_starts size mismatch");
            for (int j = 0; j < l(); ++j)
                if (dist(point_starts[j], seeds[p + j]) > delta)
                    throw ValidationError("PatchProblem: point start outside its ball");
        }
    }
};

struct PatchSolution {
    PatchProblem problem;
    std::shared_ptr<const GridSpec> grid;
    std::vector<std::vector<int>> cells;  // per patch, ascending flat indices
    std::vector<double> thresholds;       // c_i
    std::vector<Vec2> points;             // point-vortex positions (size l)
    GridField omega;                      // bang-bang field
    GridField psi;                        // stream field for omega
    double energy = 0.0;                  // the full maximized functional
    double kinetic = 0.0;                 // T
    std::vector<Vec2> centers;            // z_i
    std::vector<double> diameters;        // union-of-squares diameter of A_i
    int iterations = 0;
    bool converged = false;
    std::vector<double> energy_history;

    void rebuild_omega() {
        omega = GridField(grid);
        for (int i = 0; i < problem.p; ++i) {
            const double v = (problem.strengths[i] > 0 ? 1.0 : -1.0) * problem.lambda;
            for (int c : cells[i]) omega.set(c, v);
        }
    }
    std::vector<int> support() const {
        std::vector<int> s;
        for (const auto& cs : cells) s.insert(s.end(), cs.begin(), cs.end());
        std::sort(s.begin(), s.end());
        return s;
    }
};

namespace detail {

inline std::vector<int> ball_cells(const GridSpec& spec, Vec2 center, double radius) {
    std::vector<int> out;
    for (int idx : spec.interior_cells)
        if (dist(spec.center_of(idx), center) < radius) out.push_back(idx);
    return out;
}

// exact diameter of a union of grid squares: max over cell pairs of the
// farthest corner-to-corner distance
inline double cell_set_diameter(const GridSpec& spec, const std::vector<int>& cells) {
    if (cells.empty()) return 0.0;
    double best = 0.0;
    for (std::size_t a = 0; a < cells.size(); ++a) {
        const Vec2 ca = spec.center_of(cells[a]);
        for (std::size_t b = a; b < cells.size(); ++b) {
            const Vec2 cb = spec.center_of(cells[b]);
            const double dx = std::abs(ca.x - cb.x) + spec.h;
            const double dy = std::abs(ca.y - cb.y) + spec.h;
            best = std::max(best, dx * dx + dy * dy);
        }
    }
    return std::sqrt(best);
}

inline Vec2 cell_set_centroid_weighted(const GridSpec& spec, const std::vector<int>& cells,
                                       double cell_weight, double total) {
    Vec2 acc{0.0, 0.0};
    for (int c : cells) acc += spec.center_of(c);
    return acc * (cell_weight / total);
}

} // namespace detail

// f_i = sgn(kappa_i) (psi + sum_{j>p} kappa_j G(x_j, .)) on the cells of
// B_delta(seed_i); psi must be current for the stored omega.
inline std::vector<int> patch_ball_cells(const PatchSolution& sol, int i) {
    return detail::ball_cells(*sol.grid, sol.problem.seeds[i], sol.problem.delta);
}

inline std::vector<double> combined_field(const PatchSolution& sol, int i,
                                          const std::vector<int>& ball) {
    const PatchProblem& pb = sol.problem;
    for (int j = 0; j < pb.l(); ++j)
        if (dist(sol.points[j], pb.seeds[i]) < pb.delta)
            throw ValidationError("combined_field: point vortex inside a patch ball");
    const double sgn = pb.strengths[i] > 0 ? 1.0 : -1.0;
    std::vector<double> f(ball.size());
    for (std::size_t t = 0; t < ball.size(); ++t) {
        const Vec2 xc = sol.grid->center_of(ball[t]);
        double v = sol.psi.values[ball[t]];
        for (int j = 0; j < pb.l(); ++j)
            v += pb.strengths[pb.p + j] * green_disk(sol.points[j], xc);
        f[t] = sgn * v;
    }
    return f;
}

inline std::vector<double> combined_field(const PatchSolution& sol, int i) {
    return combined_field(sol, i, patch_ball_cells(sol, i));
}

struct BangBangResult {
    std::vector<int> cells; // ascending
    double threshold = 0.0; // (m+1)-th largest f value
};

// Bathtub step: keep the m_i cells of largest f_i. The threshold is the
// next order statistic, i.e. the sup of f_i over the unselected part of
// the ball; this is the discrete sup/inf characterization. The same c_i
// convention is used for either sign of kappa_i: c_i thresholds the
// signed field sgn(kappa_i)(psi + ...), so for kappa_i < 0 it is the
// negative of the unsigned field's threshold.
inline BangBangResult bang_bang_update(const PatchSolution& sol, int i,
                                       const std::vector<int>& ball,
                                       const std::vector<double>& f) {
    const PatchProblem& pb = sol.problem;
    const double h2 = sol.grid->cell_area();
    const long m = std::lround(std::abs(pb.strengths[i]) / (pb.lambda * h2));
    if (m < pb.min_patch_cells)
        throw ValidationError("bang_bang_update: grid too coarse for this lambda (patch below min_patch_cells)");
    if (static_cast<std::size_t>(m) >= ball.size())
        throw ValidationError("bang_bang_update: confinement ball has too few grid cells");

    std::vector<std::size_t> order(ball.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (f[a] != f[b]) return f[a] > f[b];
        return ball[a] < ball[b]; // deterministic tie-break by cell index
    });

    BangBangResult out;
    out.cells.resize(m);
    for (long t = 0; t < m; ++t) out.cells[t] = ball[order[t]];
    std::sort(out.cells.begin(), out.cells.end());
    out.threshold = f[order[m]];

    // a selected cell whose 4-neighborhood pokes out of the ball means the
    // patch is being squeezed by the confinement radius
    const GridSpec& spec = *sol.grid;
    for (int c : out.cells) {
        const int ci = c % spec.n, cj = c / spec.n;
        const int nb[4] = {spec.index(ci - 1, cj), spec.index(ci + 1, cj),
                           spec.index(ci, cj - 1), spec.index(ci, cj + 1)};
        for (int nidx : nb) {
            const bool in_ball = ci > 0 && ci < spec.n - 1 && cj > 0 && cj < spec.n - 1 &&
                                 spec.is_interior(nidx) &&
                                 dist(spec.center_of(nidx), pb.seeds[i]) < pb.delta;
            if (!in_ball)
                throw NumericalError("bang_bang_update: patch touches its confinement ball");
        }
    }
    return out;
}

inline BangBangResult bang_bang_update(const PatchSolution& sol, int i) {
    const auto ball = patch_ball_cells(sol, i);
    return bang_bang_update(sol, i, ball, combined_field(sol, i, ball));
}

namespace detail {

// x_j-dependent part of the functional:
//   W(x) = kappa_j psi(x) + sum_{i != j, points} kappa_i kappa_j G(x_i, x)
//          - kappa_j^2 H(x)
struct PointObjective {
    const PatchSolution& sol;
    const std::vector<int>& sources;
    int j; // point index in [0, l)

    double value(Vec2 x) const {
        const PatchProblem& pb = sol.problem;
        const double kj = pb.strengths[pb.p + j];
        double w = kj * psi_at(sol.omega, sources, x) - kj * kj * robin_H(x);
        for (int i = 0; i < pb.l(); ++i) {
            if (i == j) continue;
            w += pb.strengths[pb.p + i] * kj * green_disk(sol.points[i], x);
        }
        return w;
    }
    Vec2 gradient(Vec2 x) const {
        const PatchProblem& pb = sol.problem;
        const double kj = pb.strengths[pb.p + j];
        Vec2 g = kj * grad_psi_at(sol.omega, sources, x) - kj * kj * grad_H(x);
        for (int i = 0; i < pb.l(); ++i) {
            if (i == j) continue;
            g += pb.strengths[pb.p + i] * kj * grad_green_disk(x, sol.points[i]);
        }
        return g;
    }
};

} // namespace detail

struct PointUpdateResult {
    Vec2 position;
    double move = 0.0;
    double residual = 0.0; // |grad W| / |kappa_j| at the returned position
};

// One projected gradient-ascent pass with Armijo backtracking on W,
// constrained to the closed ball B_delta(seed_{p+j}).
inline PointUpdateResult point_update(const PatchSolution& sol, int j,
                                      const std::vector<int>& sources) {
    const PatchProblem& pb = sol.problem;
    const Vec2 seed = pb.seeds[pb.p + j];
    const double kj = std::abs(pb.strengths[pb.p + j]);
    auto project = [&](Vec2 q) {
        const Vec2 d = q - seed;
        const double r = norm(d);
        return r > pb.delta ? seed + d * (pb.delta / r) : q;
    };
    detail::PointObjective W{sol, sources, j};

    const Vec2 x = sol.points[j];
    const Vec2 g = W.gradient(x);
    const double gn = norm(g);
    PointUpdateResult out{x, 0.0, gn / kj};
    if (out.residual < pb.point_tol) return out; // already critical

    const double w0 = W.value(x);
    const double t0 = std::min(1.0, (pb.delta / 4.0) / gn);
    for (double t = t0; t > t0 * 1e-14; t *= 0.5) {
        const Vec2 trial = project(x + g * t);
        const Vec2 d = trial - x;
        if (norm2(d) == 0.0) break;
        if (W.value(trial) >= w0 + 1e-4 * dot(g, d)) {
            out.position = trial;
            out.move = norm(d);
            out.residual = norm(W.gradient(trial)) / kj;
            return out;
        }
    }
    // no admissible ascent step: stuck on the ball boundary against an
    // outward gradient is an error, interior stalls are just convergence
    if (norm(x - seed) > pb.delta - 1e-12 && dot(g, x - seed) > 0.0)
        throw NumericalError("point_update: point vortex pinned to its confinement ball");
    return out;
}

inline PointUpdateResult point_update(const PatchSolution& sol, int j) {
    return point_update(sol, j, sol.support());
}

namespace detail {

// full functional value; psi must be current for omega at the support cells
inline double script_energy(const PatchSolution& sol, const std::vector<int>& sources) {
    const PatchProblem& pb = sol.problem;
    double e = energy_E(sol.omega, sol.psi);
    for (int j = 0; j < pb.l(); ++j) {
        const double kj = pb.strengths[pb.p + j];
        e += kj * psi_at(sol.omega, sources, sol.points[j]);
        e -= kj * kj * robin_H(sol.points[j]);
        for (int i = 0; i < j; ++i)
            e += pb.strengths[pb.p + i] * kj * green_disk(sol.points[i], sol.points[j]);
    }
    return e;
}

} // namespace detail

// Initial state: each patch fills the cells of B_eps_i(seed_i) nearest the
// seed, with eps_i from lambda pi eps_i^2 = |kappa_i|; points start at
// their seeds.
inline PatchSolution init_patches(const PatchProblem& problem_in) {
    PatchProblem pb = problem_in;
    pb.resolve_radii();
    pb.validate();

    PatchSolution sol;
    sol.problem = pb;
    sol.grid = GridSpec::make(pb.grid_n, DiskDomain{pb.domain_radius});
    const GridSpec& spec = *sol.grid;
    const double h2 = spec.cell_area();

    sol.cells.resize(pb.p);
    sol.thresholds.assign(pb.p, 0.0);
    for (int i = 0; i < pb.p; ++i) {
        const long m = std::lround(std::abs(pb.strengths[i]) / (pb.lambda * h2));
        if (m < pb.min_patch_cells)
            throw ValidationError("init_patches: grid too coarse for this lambda (patch below min_patch_cells)");
        std::vector<int> ball = detail::ball_cells(spec, pb.seeds[i], pb.delta);
        if (static_cast<std::size_t>(m) >= ball.size())
            throw ValidationError("init_patches: confinement ball has too few grid cells");
        std::sort(ball.begin(), ball.end(), [&](int a, int b) {
            const double da = dist(spec.center_of(a), pb.seeds[i]);
            const double db = dist(spec.center_of(b), pb.seeds[i]);
            if (da != db) return da < db;
            return a < b;
        });
        ball.resize(m);
        std::sort(ball.begin(), ball.end());
        sol.cells[i] = std::move(ball);
    }
    if (pb.point_starts.empty())
        sol.points.assign(pb.seeds.begin() + pb.p, pb.seeds.end());
    else
        sol.points = pb.point_starts;
    sol.rebuild_omega();
    sol.psi = GridField(sol.grid);
    return sol;
}

// Alternating ascent. Each outer iteration recomputes psi on the union of
// ball cells (bit-identical to the full Poisson quadrature restricted to
// those cells), rearranges every patch with one bathtub step, then moves
// every point vortex by one projected ascent pass. Convergence: cell sets
// unchanged, point moves and residuals below point_tol, threshold drift
// below threshold_tol. Non-convergence is a flag, not an exception.
inline PatchSolution solve(const PatchProblem& problem_in) {
    PatchSolution sol = init_patches(problem_in);
    const PatchProblem& pb = sol.problem;
    const GridSpec& spec = *sol.grid;

    std::vector<std::vector<int>> balls(pb.p);
    std::vector<int> all_ball_cells;
    for (int i = 0; i < pb.p; ++i) {
        balls[i] = detail::ball_cells(spec, pb.seeds[i], pb.delta);
        all_ball_cells.insert(all_ball_cells.end(), balls[i].begin(), balls[i].end());
    }
    std::sort(all_ball_cells.begin(), all_ball_cells.end());

    double prev_move = pb.l() > 0 ? std::numeric_limits<double>::infinity() : 0.0;
    double prev_residual = prev_move;
    std::vector<double> prev_thresholds;
    std::vector<double> psi_vals(all_ball_cells.size());

    int iter = 0;
    for (; iter < pb.max_outer; ++iter) {
        std::vector<int> sources = sol.support();
        accumulate_psi(spec, sources, sol.omega.values, all_ball_cells, psi_vals);
        std::fill(sol.psi.values.begin(), sol.psi.values.end(), 0.0);
        for (std::size_t t = 0; t < all_ball_cells.size(); ++t)
            sol.psi.values[all_ball_cells[t]] = psi_vals[t];

        sol.energy_history.push_back(detail::script_energy(sol, sources));

        bool cells_changed = false;
        std::vector<double> new_thresholds(pb.p);
        std::vector<std::vector<int>> new_cells(pb.p);
        for (int i = 0; i < pb.p; ++i) {
            BangBangResult r =
                bang_bang_update(sol, i, balls[i], combined_field(sol, i, balls[i]));
            if (r.cells != sol.cells[i]) cells_changed = true;
            new_cells[i] = std::move(r.cells);
            new_thresholds[i] = r.threshold;
        }

        double threshold_drift = std::numeric_limits<double>::infinity();
        if (!prev_thresholds.empty()) {
            threshold_drift = 0.0;
            for (int i = 0; i < pb.p; ++i)
                threshold_drift =
                    std::max(threshold_drift, std::abs(new_thresholds[i] - prev_thresholds[i]));
        }
        sol.thresholds = new_thresholds;
        prev_thresholds = std::move(new_thresholds);

        if (!cells_changed && prev_move < pb.point_tol && prev_residual < pb.point_tol &&
            threshold_drift < pb.threshold_tol) {
            sol.converged = true;
            ++iter;
            break;
        }

        if (cells_changed) {
            sol.cells = std::move(new_cells);
            sol.rebuild_omega();
            sources = sol.support();
        }

        prev_move = 0.0;
        prev_residual = 0.0;
        for (int j = 0; j < pb.l(); ++j) {
            PointUpdateResult r = point_update(sol, j, sources);
            sol.points[j] = r.position;
            prev_move = std::max(prev_move, r.move);
            prev_residual = std::max(prev_residual, r.residual);
        }
    }
    sol.iterations = iter;

    // final consistent fields and diagnostics
    sol.psi = poisson_solve(sol.omega);
    const std::vector<int> sources = sol.support();
    if (!sol.converged) {
        for (int i = 0; i < pb.p; ++i)
            sol.thresholds[i] =
                bang_bang_update(sol, i, balls[i], combined_field(sol, i, balls[i])).threshold;
        sol.energy_history.push_back(detail::script_energy(sol, sources));
    }
    sol.energy = detail::script_energy(sol, sources);

    const double h2 = spec.cell_area();
    sol.centers.resize(pb.p);
    sol.diameters.resize(pb.p);
    double kin = 0.0;
    for (int i = 0; i < pb.p; ++i) {
        sol.centers[i] = detail::cell_set_centroid_weighted(
            spec, sol.cells[i], pb.lambda * h2 * (pb.strengths[i] > 0 ? 1.0 : -1.0),
            pb.strengths[i]);
        sol.diameters[i] = detail::cell_set_diameter(spec, sol.cells[i]);
        const std::vector<double> f = combined_field(sol, i, balls[i]);
        for (std::size_t t = 0; t < balls[i].size(); ++t)
            if (std::binary_search(sol.cells[i].begin(), sol.cells[i].end(), balls[i][t]))
                kin += 0.5 * pb.lambda * (f[t] - sol.thresholds[i]) * h2;
    }
    sol.kinetic = kin;
    return sol;
}

// T = sum_i (sgn(kappa_i)/2) sum_{A_i} omega_i (f_i - c_i) h^2, recomputed
// from the stored fields.
inline double kinetic_T(const PatchSolution& sol) {
    const PatchProblem& pb = sol.problem;
    const double h2 = sol.grid->cell_area();
    double kin = 0.0;
    for (int i = 0; i < pb.p; ++i) {
        const auto ball = patch_ball_cells(sol, i);
        const auto f = combined_field(sol, i, ball);
        for (std::size_t t = 0; t < ball.size(); ++t)
            if (std::binary_search(sol.cells[i].begin(), sol.cells[i].end(), ball[t]))
                kin += 0.5 * pb.lambda * (f[t] - sol.thresholds[i]) * h2;
    }
    return kin;
}

struct ThresholdDiagnostics {
    std::vector<double> threshold_vs_log_delta; // c_i + (|kappa_i|/2pi) ln delta
    double threshold_sum_compensated = 0.0;     // sum c_i|kappa_i| + (1/2pi) sum kappa_i^2 ln eps_i
    double background_energy = 0.0;             // E(omega)
    double energy_compensated = 0.0;            // E(omega) + (1/4pi) sum kappa_i^2 ln eps_i
    std::vector<double> outer_ring_excess;      // max over dB_delta0 of sgn f - c_i (<= 0 expected)
};

inline ThresholdDiagnostics threshold_diagnostics(const PatchSolution& sol) {
    const PatchProblem& pb = sol.problem;
    ThresholdDiagnostics d;
    d.background_energy = energy_E(sol.omega, sol.psi);
    double comp37 = 0.0, comp35 = 0.0;
    for (int i = 0; i < pb.p; ++i) {
        const double ki = pb.strengths[i];
        d.threshold_vs_log_delta.push_back(
            sol.thresholds[i] + std::abs(ki) / (2.0 * std::numbers::pi) * std::log(pb.delta));
        comp37 += sol.thresholds[i] * std::abs(ki) +
                  ki * ki / (2.0 * std::numbers::pi) * std::log(pb.epsilon(i));
        comp35 += ki * ki / (4.0 * std::numbers::pi) * std::log(pb.epsilon(i));
    }
    d.threshold_sum_compensated = comp37;
    d.energy_compensated = d.background_energy + comp35;

    const std::vector<int> sources = sol.support();
    for (int i = 0; i < pb.p; ++i) {
        const double sgn = pb.strengths[i] > 0 ? 1.0 : -1.0;
        double worst = -std::numeric_limits<double>::infinity();
        constexpr int n_samples = 256;
        for (int a = 0; a < n_samples; ++a) {
            const double th = 2.0 * std::numbers::pi * a / n_samples;
            const Vec2 x = pb.seeds[i] + Vec2{pb.delta0 * std::cos(th), pb.delta0 * std::sin(th)};
            double v = psi_at(sol.omega, sources, x);
            for (int j = 0; j < pb.l(); ++j)
                v += pb.strengths[pb.p + j] * green_disk(sol.points[j], x);
            worst = std::max(worst, sgn * v - sol.thresholds[i]);
        }
        d.outer_ring_excess.push_back(worst);
    }
    return d;
}

// --- weak formulation residuals ---------------------------------------

struct TestFunction {
    std::string name;
    Vec2 center;
    double rho = 0.0;
    int moment = 0; // 0: bump, 1: (x-cx)*bump, 2: (y-cy)*bump

    double operator()(Vec2 q) const {
        const double tx = (q.x - center.x) / rho, ty = (q.y - center.y) / rho;
        if (tx * tx >= 1.0 || ty * ty >= 1.0) return 0.0;
        const double bx = (1.0 - tx * tx), by = (1.0 - ty * ty);
        const double b = bx * bx * bx * by * by * by;
        if (moment == 1) return (q.x - center.x) * b;
        if (moment == 2) return (q.y - center.y) * b;
        return b;
    }
};

// 9 bumps on a 3x3 subgrid of B_delta0(seed_i) plus the two first-moment
// bumps; all supports stay inside B_delta0 (offsets and radius delta0/3).
inline std::vector<TestFunction> default_test_functions(const PatchProblem& pb) {
    std::vector<TestFunction> fns;
    for (int i = 0; i < pb.p; ++i) {
        const double rho = pb.delta0 / 3.0;
        for (int v = -1; v <= 1; ++v)
            for (int u = -1; u <= 1; ++u) {
                TestFunction tf;
                tf.name = "patch" + std::to_string(i + 1) + "_bump(" + std::to_string(u) + "," +
                          std::to_string(v) + ")";
                tf.center = pb.seeds[i] + Vec2{u * rho, v * rho};
                tf.rho = rho;
                fns.push_back(tf);
            }
        for (int mom = 1; mom <= 2; ++mom) {
            TestFunction tf;
            tf.name = "patch" + std::to_string(i + 1) + (mom == 1 ? "_xmoment" : "_ymoment");
            tf.center = pb.seeds[i];
            tf.rho = rho;
            tf.moment = mom;
            fns.push_back(tf);
        }
    }
    return fns;
}

struct WeakResidual {
    std::string name;
    double raw = 0.0;
    double normalized = 0.0; // |R| / (lambda * max |grad phi|)
};

// R(phi) = sum_cells omega (grad Psi . J grad phi) h^2 with
// Psi = psi + sum_j kappa_j G(x_j, .), both gradients by centered
// differences of grid samples.
inline std::vector<WeakResidual> weak_residual(const PatchSolution& sol,
                                               const std::vector<TestFunction>& fns) {
    const PatchProblem& pb = sol.problem;
    const GridSpec& spec = *sol.grid;
    const double h = spec.h, h2 = spec.cell_area();
    const std::vector<int> support = sol.support();

    // Psi sampled on the patch neighborhood (support plus stencil ring)
    std::vector<double> Psi(static_cast<std::size_t>(spec.n) * spec.n, 0.0);
    for (int idx : spec.interior_cells) {
        const Vec2 xc = spec.center_of(idx);
        bool near = false;
        for (int i = 0; i < pb.p && !near; ++i)
            near = dist(xc, pb.seeds[i]) < pb.delta + 2.0 * h;
        if (!near) continue;
        double v = sol.psi.values[idx];
        for (int j = 0; j < pb.l(); ++j)
            v += pb.strengths[pb.p + j] * green_disk(sol.points[j], xc);
        Psi[idx] = v;
    }
    const int last = spec.n * spec.n - 1;
    auto grad_of = [&](const std::vector<double>& vals, int idx) -> Vec2 {
        if (idx - spec.n < 0 || idx + spec.n > last)
            throw NumericalError("weak_residual: stencil leaves the grid");
        return {(vals[idx + 1] - vals[idx - 1]) / (2.0 * h),
                (vals[idx + spec.n] - vals[idx - spec.n]) / (2.0 * h)};
    };

    std::vector<WeakResidual> out;
    std::vector<double> phi(static_cast<std::size_t>(spec.n) * spec.n, 0.0);
    for (const TestFunction& tf : fns) {
        double max_grad_phi = 0.0;
        for (int idx : spec.interior_cells) {
            const Vec2 xc = spec.center_of(idx);
            if (std::abs(xc.x - tf.center.x) > tf.rho + h ||
                std::abs(xc.y - tf.center.y) > tf.rho + h)
                continue;
            phi[idx] = tf(xc);
            if (idx - spec.n >= 0 && idx + spec.n <= last) {
                const Vec2 gp = {(tf(spec.center_of(idx + 1)) - tf(spec.center_of(idx - 1))) /
                                     (2.0 * h),
                                 (tf(spec.center_of(idx + spec.n)) -
                                  tf(spec.center_of(idx - spec.n))) /
                                     (2.0 * h)};
                max_grad_phi = std::max(max_grad_phi, norm(gp));
            }
        }
        double acc = 0.0;
        for (int idx : support)
            acc += sol.omega.values[idx] * dot(grad_of(Psi, idx), rot_cw(grad_of(phi, idx))) * h2;
        for (int idx : spec.interior_cells) phi[idx] = 0.0;

        WeakResidual r;
        r.name = tf.name;
        r.raw = acc;
        r.normalized = max_grad_phi > 0.0 ? std::abs(acc) / (pb.lambda * max_grad_phi) : 0.0;
        out.push_back(std::move(r));
    }
    return out;
}

inline std::vector<WeakResidual> weak_residual(const PatchSolution& sol) {
    return weak_residual(sol, default_test_functions(sol.problem));
}

// |grad(psi + sum_{j' != j} kappa_j' G(x_j', .) - kappa_j H)(x_j)| per
// point vortex, by exact kernel gradients.
inline std::vector<double> first_order_residual(const PatchSolution& sol) {
    const PatchProblem& pb = sol.problem;
    const std::vector<int> sources = sol.support();
    std::vector<double> out;
    for (int j = 0; j < pb.l(); ++j) {
        detail::PointObjective W{sol, sources, j};
        out.push_back(norm(W.gradient(sol.points[j])) / std::abs(pb.strengths[pb.p + j]));
    }
    return out;
}

} // namespace vwp
