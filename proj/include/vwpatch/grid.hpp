#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "vwpatch/errors.hpp"
#include "vwpatch/geometry.hpp"

namespace vwp {

// Uniform cell grid over the bounding box [-R,R]^2 of the disk. A cell is
// interior iff its center lies strictly inside the disk; fields vanish on
// exterior cells.
struct GridSpec {
    int n = 0;
    double radius = 1.0; // bounding box half-width = disk radius
    double h = 0.0;      // cell size 2R/n
    std::vector<std::uint8_t> interior;  // n*n flags
    std::vector<int> interior_cells;     // ascending flat indices

    static std::shared_ptr<const GridSpec> make(int n, const DiskDomain& domain = {}) {
        if (n < 16) throw ValidationError("GridSpec: n must be at least 16");
        auto spec = std::make_shared<GridSpec>();
        spec->n = n;
        spec->radius = domain.radius;
        spec->h = 2.0 * domain.radius / n;
        spec->interior.assign(static_cast<std::size_t>(n) * n, 0);
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                const int idx = j * n + i;
                if (domain.contains(spec->center_of(idx))) {
                    spec->interior[idx] = 1;
                    spec->interior_cells.push_back(idx);
                }
            }
        }
        return spec;
    }

    int index(int i, int j) const { return j * n + i; }
    Vec2 center_of(int idx) const {
        const int i = idx % n, j = idx / n;
        return {-radius + (i + 0.5) * h, -radius + (j + 0.5) * h};
    }
    bool is_interior(int idx) const {
        return idx >= 0 && idx < n * n && interior[idx] != 0;
    }
    // flat index of the cell containing p (not necessarily interior)
    int cell_at(Vec2 p) const {
        auto clamp = [this](double t) {
            int c = static_cast<int>(std::floor((t + radius) / h));
            return c < 0 ? 0 : (c >= n ? n - 1 : c);
        };
        return index(clamp(p.x), clamp(p.y));
    }
    double cell_area() const { return h * h; }
    bool same_layout(const GridSpec& o) const { return n == o.n && radius == o.radius; }
};

struct GridField {
    std::shared_ptr<const GridSpec> spec;
    std::vector<double> values; // one per cell, zero outside the mask

    GridField() = default;
    explicit GridField(std::shared_ptr<const GridSpec> s)
        : spec(std::move(s)), values(static_cast<std::size_t>(spec->n) * spec->n, 0.0) {}

    double operator[](int idx) const { return values[idx]; }

    void set(int idx, double v) {
        if (!spec->is_interior(idx))
            throw ValidationError("GridField: write outside the interior mask");
        if (!std::isfinite(v))
            throw ValidationError("GridField: non-finite value");
        values[idx] = v;
    }

    // ascending indices of nonzero cells
    std::vector<int> support() const {
        std::vector<int> s;
        for (int idx : spec->interior_cells)
            if (values[idx] != 0.0) s.push_back(idx);
        return s;
    }
};

inline void require_same_grid(const GridField& a, const GridField& b, const char* who) {
    if (!a.spec || !b.spec || !a.spec->same_layout(*b.spec))
        throw ValidationError(std::string(who) + ": mismatched grid specs");
}

} // namespace vwp
