#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "vwpatch/grid.hpp"
#include "vwpatch/kernels.hpp"

namespace vwp {

// Exact integral of -(1/2pi) ln|x-y| over a square cell of side h centered
// at x equals (h^2/2pi)(ln(1/h) + c0). Closed form of c0 (polar octants):
// 3/2 + (ln 2)/2 - pi/4; derivation in scripts/self_cell_constant.py.
inline constexpr double kSelfCellC0 = 1.5 + 0.34657359027997264 - std::numbers::pi / 4.0;

namespace detail {

// Quadrature weight of source cell `src` for a target at cell `tgt`
// (without the trailing cell-area factor of the outer sum). The diagonal
// uses the exact cell integral of the log kernel minus the regular part.
inline double cell_green_weight(const GridSpec& spec, int tgt, int src) {
    const Vec2 xt = spec.center_of(tgt);
    if (tgt == src) {
        const double log_part = (std::log(1.0 / spec.h) + kSelfCellC0) / (2.0 * std::numbers::pi);
        return log_part - robin_h(xt, xt);
    }
    return green_disk(xt, spec.center_of(src));
}

} // namespace detail

// psi = (-Laplace)^{-1} omega by direct kernel quadrature over the
// source cells: psi(x_c) = sum_src G(x_c, y_src) omega_src h^2, with the
// diagonal replaced by the exact self-cell integral. Source order is the
// ascending cell index, so sums are reproducible bit-for-bit.
inline void accumulate_psi(const GridSpec& spec, std::span<const int> sources,
                           const std::vector<double>& omega,
                           std::span<const int> targets, std::vector<double>& out) {
    const double area = spec.cell_area();
    for (std::size_t t = 0; t < targets.size(); ++t) {
        const int tgt = targets[t];
        double acc = 0.0;
        for (int src : sources)
            acc += detail::cell_green_weight(spec, tgt, src) * omega[src];
        out[t] = acc * area;
    }
}

inline GridField poisson_solve(const GridField& omega) {
    if (!omega.spec) throw ValidationError("poisson_solve: field without grid spec");
    const GridSpec& spec = *omega.spec;
    const std::vector<int> sources = omega.support();
    GridField psi(omega.spec);
    std::vector<double> vals(spec.interior_cells.size());
    accumulate_psi(spec, sources, omega.values, spec.interior_cells, vals);
    for (std::size_t t = 0; t < spec.interior_cells.size(); ++t)
        psi.values[spec.interior_cells[t]] = vals[t];
    return psi;
}

// Off-grid stream evaluation psi(x) = sum_src G(x, y_src) omega_src h^2.
// Valid away from source cell centers (the kernel rejects coincidence).
inline double psi_at(const GridField& omega, std::span<const int> sources, Vec2 x) {
    const GridSpec& spec = *omega.spec;
    double acc = 0.0;
    for (int src : sources)
        acc += green_disk(x, spec.center_of(src)) * omega.values[src];
    return acc * spec.cell_area();
}

inline Vec2 grad_psi_at(const GridField& omega, std::span<const int> sources, Vec2 x) {
    const GridSpec& spec = *omega.spec;
    Vec2 acc{0.0, 0.0};
    for (int src : sources)
        acc += grad_green_disk(x, spec.center_of(src)) * omega.values[src];
    return acc * spec.cell_area();
}

// E(omega) = (1/2) sum omega psi h^2, the discrete double Green integral.
inline double energy_E(const GridField& omega, const GridField& psi) {
    require_same_grid(omega, psi, "energy_E");
    double acc = 0.0;
    for (int idx : omega.spec->interior_cells)
        acc += omega.values[idx] * psi.values[idx];
    return 0.5 * acc * omega.spec->cell_area();
}

} // namespace vwp
