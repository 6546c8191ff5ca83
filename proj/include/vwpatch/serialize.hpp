#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vwpatch/asymptotics.hpp"
#include "vwpatch/config.hpp"
#include "vwpatch/patch.hpp"
#include "vwpatch/point_vortex.hpp"
#include "vwpatch/textio.hpp"
#include "vwpatch/vortex_wave.hpp"

// Versioned structured-text records. Every writer here has a loader that
// reproduces the in-memory values bit-exactly (doubles at 17 significant
// digits), and serialize(load(x)) == x byte-for-byte.

namespace vwp {

inline constexpr const char* kToolVersion = "0.1.0";

namespace detail {

inline std::string join_doubles(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt(v[i]);
    return s;
}

inline std::string join_points(const std::vector<Vec2>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " ; " : "") + fmt(v[i]);
    return s;
}

inline std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
    return s;
}

inline std::vector<int> parse_int_list(std::string_view s) {
    std::vector<int> out;
    for (const std::string& tok : split_ws(s)) out.push_back(static_cast<int>(parse_long(tok)));
    return out;
}

// header line "vwpatch-<kind> <version>", then config-style sections
struct Record {
    std::string kind;
    int version = 0;
    std::vector<KeyValue> entries;

    const std::string* find(const std::string& section, const std::string& key) const {
        for (const auto& kv : entries)
            if (kv.section == section && kv.key == key) return &kv.value;
        return nullptr;
    }
    const std::string& need(const std::string& section, const std::string& key) const {
        const std::string* v = find(section, key);
        if (!v)
            throw ValidationError("record missing key '" + section + "." + key + "'");
        return *v;
    }
};

inline Record parse_record(const std::string& text, const std::string& expect_kind) {
    const std::size_t eol = text.find('\n');
    if (eol == std::string::npos) throw ValidationError("record: missing header line");
    const auto head = split_ws(text.substr(0, eol));
    if (head.size() != 2 || head[0] != "vwpatch-" + expect_kind)
        throw ValidationError("record: expected a vwpatch-" + expect_kind + " header");
    Record rec;
    rec.kind = expect_kind;
    rec.version = static_cast<int>(parse_long(head[1]));
    if (rec.version != kSchemaVersion) throw ValidationError("record: unsupported schema version");
    rec.entries = parse_key_values(text.substr(eol + 1));
    return rec;
}

} // namespace detail

// --- KRPoint ------------------------------------------------------------

inline std::string serialize_krpoint(const KRPoint& kr) {
    std::string s = "vwpatch-krpoint " + fmt(kSchemaVersion) + "\n";
    s += "positions = " + detail::join_points(kr.positions) + "\n";
    s += "value = " + fmt(kr.value) + "\n";
    s += "gradient_norm = " + fmt(kr.gradient_norm) + "\n";
    s += "hessian_pd = " + fmt(kr.hessian_pd) + "\n";
    s += "hessian_pd_mod_rotation = " + fmt(kr.hessian_pd_mod_rotation) + "\n";
    s += "hessian_eigenvalues = " + detail::join_doubles(kr.hessian_eigenvalues) + "\n";
    s += "iterations = " + fmt(kr.iterations) + "\n";
    return s;
}

inline KRPoint load_krpoint(const std::string& text) {
    const auto rec = detail::parse_record(text, "krpoint");
    KRPoint kr;
    kr.positions = parse_point_list(rec.need("", "positions"));
    kr.value = parse_double(rec.need("", "value"));
    kr.gradient_norm = parse_double(rec.need("", "gradient_norm"));
    kr.hessian_pd = parse_long(rec.need("", "hessian_pd")) != 0;
    kr.hessian_pd_mod_rotation = parse_long(rec.need("", "hessian_pd_mod_rotation")) != 0;
    kr.hessian_eigenvalues = parse_double_list(rec.need("", "hessian_eigenvalues"));
    kr.iterations = static_cast<int>(parse_long(rec.need("", "iterations")));
    return kr;
}

// --- PatchSolution -------------------------------------------------------

inline std::string serialize_solution(const PatchSolution& sol) {
    const PatchProblem& pb = sol.problem;
    std::string s = "vwpatch-solution " + fmt(kSchemaVersion) + "\n";
    s += "[problem]\n";
    s += "strengths = " + detail::join_doubles(pb.strengths) + "\n";
    s += "split_p = " + fmt(pb.p) + "\n";
    s += "seeds = " + detail::join_points(pb.seeds) + "\n";
    s += "delta = " + fmt(pb.delta) + "\n";
    s += "delta0 = " + fmt(pb.delta0) + "\n";
    s += "lambda = " + fmt(pb.lambda) + "\n";
    s += "grid_n = " + fmt(pb.grid_n) + "\n";
    s += "domain_radius = " + fmt(pb.domain_radius) + "\n";
    s += "point_tol = " + fmt(pb.point_tol) + "\n";
    s += "threshold_tol = " + fmt(pb.threshold_tol) + "\n";
    s += "max_outer = " + fmt(pb.max_outer) + "\n";
    s += "min_patch_cells = " + fmt(pb.min_patch_cells) + "\n";
    if (!pb.point_starts.empty())
        s += "point_starts = " + detail::join_points(pb.point_starts) + "\n";
    s += "[result]\n";
    s += "converged = " + fmt(sol.converged) + "\n";
    s += "iterations = " + fmt(sol.iterations) + "\n";
    s += "energy = " + fmt(sol.energy) + "\n";
    s += "kinetic = " + fmt(sol.kinetic) + "\n";
    for (int i = 0; i < pb.p; ++i) {
        s += "[patch " + std::to_string(i + 1) + "]\n";
        s += "threshold = " + fmt(sol.thresholds[i]) + "\n";
        s += "center = " + fmt(sol.centers[i]) + "\n";
        s += "diameter = " + fmt(sol.diameters[i]) + "\n";
        s += "cells = " + detail::join_ints(sol.cells[i]) + "\n";
    }
    s += "[points]\n";
    s += "positions = " + detail::join_points(sol.points) + "\n";
    s += "[energy_history]\n";
    s += "values = " + detail::join_doubles(sol.energy_history) + "\n";
    return s;
}

// Rebuilds grid and omega; psi is loaded separately (see psi CSV) or
// recomputed with poisson_solve.
inline PatchSolution load_solution(const std::string& text) {
    const auto rec = detail::parse_record(text, "solution");
    PatchSolution sol;
    PatchProblem& pb = sol.problem;
    pb.strengths = parse_double_list(rec.need("problem", "strengths"));
    pb.p = static_cast<int>(parse_long(rec.need("problem", "split_p")));
    pb.seeds = parse_point_list(rec.need("problem", "seeds"));
    pb.delta = parse_double(rec.need("problem", "delta"));
    pb.delta0 = parse_double(rec.need("problem", "delta0"));
    pb.lambda = parse_double(rec.need("problem", "lambda"));
    pb.grid_n = static_cast<int>(parse_long(rec.need("problem", "grid_n")));
    pb.domain_radius = parse_double(rec.need("problem", "domain_radius"));
    pb.point_tol = parse_double(rec.need("problem", "point_tol"));
    pb.threshold_tol = parse_double(rec.need("problem", "threshold_tol"));
    pb.max_outer = static_cast<int>(parse_long(rec.need("problem", "max_outer")));
    pb.min_patch_cells = static_cast<int>(parse_long(rec.need("problem", "min_patch_cells")));
    if (const std::string* ps = rec.find("problem", "point_starts"))
        pb.point_starts = parse_point_list(*ps);
    pb.validate();

    sol.converged = parse_long(rec.need("result", "converged")) != 0;
    sol.iterations = static_cast<int>(parse_long(rec.need("result", "iterations")));
    sol.energy = parse_double(rec.need("result", "energy"));
    sol.kinetic = parse_double(rec.need("result", "kinetic"));
    sol.grid = GridSpec::make(pb.grid_n, DiskDomain{pb.domain_radius});
    for (int i = 0; i < pb.p; ++i) {
        const std::string sect = "patch " + std::to_string(i + 1);
        sol.thresholds.push_back(parse_double(rec.need(sect, "threshold")));
        const auto c = parse_point_list(rec.need(sect, "center"));
        sol.centers.push_back(c.at(0));
        sol.diameters.push_back(parse_double(rec.need(sect, "diameter")));
        sol.cells.push_back(detail::parse_int_list(rec.need(sect, "cells")));
        for (int idx : sol.cells.back())
            if (idx < 0 || idx >= pb.grid_n * pb.grid_n || !sol.grid->is_interior(idx))
                throw ValidationError("solution record: cell index outside the interior mask");
    }
    sol.points = parse_point_list(rec.need("points", "positions"));
    if (static_cast<int>(sol.points.size()) != pb.l())
        throw ValidationError("solution record: wrong point count");
    sol.energy_history = parse_double_list(rec.need("energy_history", "values"));
    sol.rebuild_omega();
    sol.psi = GridField(sol.grid);
    return sol;
}

// --- psi field CSV -------------------------------------------------------

inline std::string serialize_psi_csv(const PatchSolution& sol) {
    const GridSpec& spec = *sol.grid;
    std::string s = "i,j,x,y,psi\n";
    for (int idx : spec.interior_cells) {
        const Vec2 c = spec.center_of(idx);
        s += std::to_string(idx % spec.n) + "," + std::to_string(idx / spec.n) + "," + fmt(c.x) +
             "," + fmt(c.y) + "," + fmt(sol.psi.values[idx]) + "\n";
    }
    return s;
}

inline void load_psi_csv(const std::string& text, PatchSolution& sol) {
    const GridSpec& spec = *sol.grid;
    std::size_t pos = text.find('\n');
    if (pos == std::string::npos || text.substr(0, pos) != "i,j,x,y,psi")
        throw ValidationError("psi csv: bad header");
    ++pos;
    sol.psi = GridField(sol.grid);
    std::size_t row = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        const std::string_view line(text.data() + pos, eol - pos);
        pos = eol + 1;
        if (trim(line).empty()) continue;
        if (row >= spec.interior_cells.size()) throw ValidationError("psi csv: too many rows");
        std::vector<std::string> cols;
        std::size_t start = 0;
        for (std::size_t c = 0; c <= line.size(); ++c) {
            if (c == line.size() || line[c] == ',') {
                cols.emplace_back(line.substr(start, c - start));
                start = c + 1;
            }
        }
        if (cols.size() != 5) throw ValidationError("psi csv: bad row");
        const int idx = spec.index(static_cast<int>(parse_long(cols[0])),
                                   static_cast<int>(parse_long(cols[1])));
        if (idx != spec.interior_cells[row]) throw ValidationError("psi csv: row order mismatch");
        sol.psi.values[idx] = parse_double(cols[4]);
        ++row;
    }
    if (row != spec.interior_cells.size()) throw ValidationError("psi csv: missing rows");
}

// --- diagnostics ----------------------------------------------------------

struct SolutionDiagnostics {
    ThresholdDiagnostics thresholds;
    std::vector<WeakResidual> weak;
    std::vector<double> first_order;
};

inline SolutionDiagnostics compute_diagnostics(const PatchSolution& sol) {
    return {threshold_diagnostics(sol), weak_residual(sol), first_order_residual(sol)};
}

inline std::string serialize_diagnostics(const SolutionDiagnostics& d) {
    std::string s = "vwpatch-diagnostics " + fmt(kSchemaVersion) + "\n";
    s += "[threshold]\n";
    s += "threshold_log_delta = " + detail::join_doubles(d.thresholds.threshold_vs_log_delta) + "\n";
    s += "threshold_sum_compensated = " + fmt(d.thresholds.threshold_sum_compensated) + "\n";
    s += "background_energy = " + fmt(d.thresholds.background_energy) + "\n";
    s += "energy_compensated = " + fmt(d.thresholds.energy_compensated) + "\n";
    s += "outer_ring_excess = " + detail::join_doubles(d.thresholds.outer_ring_excess) + "\n";
    s += "[weak_residual]\n";
    for (const WeakResidual& w : d.weak)
        s += w.name + " = " + fmt(w.raw) + " " + fmt(w.normalized) + "\n";
    s += "[first_order]\n";
    s += "residuals = " + detail::join_doubles(d.first_order) + "\n";
    return s;
}

inline SolutionDiagnostics load_diagnostics(const std::string& text) {
    const auto rec = detail::parse_record(text, "diagnostics");
    SolutionDiagnostics d;
    d.thresholds.threshold_vs_log_delta =
        parse_double_list(rec.need("threshold", "threshold_log_delta"));
    d.thresholds.threshold_sum_compensated =
        parse_double(rec.need("threshold", "threshold_sum_compensated"));
    d.thresholds.background_energy = parse_double(rec.need("threshold", "background_energy"));
    d.thresholds.energy_compensated = parse_double(rec.need("threshold", "energy_compensated"));
    d.thresholds.outer_ring_excess = parse_double_list(rec.need("threshold", "outer_ring_excess"));
    for (const auto& kv : rec.entries) {
        if (kv.section != "weak_residual") continue;
        const auto vals = parse_double_list(kv.value);
        if (vals.size() != 2) throw ValidationError("diagnostics: bad weak residual row");
        d.weak.push_back({kv.key, vals[0], vals[1]});
    }
    d.first_order = parse_double_list(rec.need("first_order", "residuals"));
    return d;
}

// --- sweep records ---------------------------------------------------------

inline std::string sweep_csv_header(int p, int l) {
    std::string s = "lambda,h,delta,converged,iterations,energy,background_energy,kinetic,"
                    "max_weak_residual,max_first_order,energy_compensated,threshold_sum_compensated";
    for (int i = 1; i <= p; ++i) {
        const std::string t = std::to_string(i);
        s += ",eps" + t + ",diam" + t + ",zx" + t + ",zy" + t + ",center_dist" + t + ",c" + t +
             ",threshold_log_delta" + t + ",ring_excess" + t;
    }
    for (int j = 1; j <= l; ++j) {
        const std::string t = std::to_string(j);
        s += ",px" + t + ",py" + t + ",point_dist" + t;
    }
    return s;
}

inline std::string serialize_sweep_csv(const std::vector<SweepRecord>& records) {
    if (records.empty()) throw ValidationError("serialize_sweep_csv: no records");
    const int p = static_cast<int>(records.front().diam.size());
    const int l = static_cast<int>(records.front().points.size());
    std::string s = sweep_csv_header(p, l) + "\n";
    for (const SweepRecord& r : records) {
        s += fmt(r.lambda) + "," + fmt(r.h) + "," + fmt(r.delta) + "," + fmt(r.converged) + "," +
             fmt(r.iterations) + "," + fmt(r.energy) + "," + fmt(r.background_energy) + "," +
             fmt(r.kinetic) + "," + fmt(r.max_weak_residual) + "," + fmt(r.max_first_order) + "," +
             fmt(r.diag.energy_compensated) + "," + fmt(r.diag.threshold_sum_compensated);
        for (int i = 0; i < p; ++i)
            s += "," + fmt(r.eps[i]) + "," + fmt(r.diam[i]) + "," + fmt(r.centers[i].x) + "," +
                 fmt(r.centers[i].y) + "," + fmt(r.center_dist[i]) + "," + fmt(r.thresholds[i]) +
                 "," + fmt(r.diag.threshold_vs_log_delta[i]) + "," +
                 fmt(r.diag.outer_ring_excess[i]);
        for (int j = 0; j < l; ++j)
            s += "," + fmt(r.points[j].x) + "," + fmt(r.points[j].y) + "," + fmt(r.point_dist[j]);
        s += "\n";
    }
    return s;
}

inline std::vector<SweepRecord> load_sweep_csv(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        if (!trim(std::string_view(text).substr(pos, eol - pos)).empty())
            lines.emplace_back(text.substr(pos, eol - pos));
        pos = eol + 1;
    }
    if (lines.size() < 2) throw ValidationError("sweep csv: no data rows");
    // infer p and l from the header
    int p = 0, l = 0;
    while (lines[0].find(",eps" + std::to_string(p + 1) + ",") != std::string::npos) ++p;
    while (lines[0].find(",px" + std::to_string(l + 1) + ",") != std::string::npos) ++l;
    if (lines[0] != sweep_csv_header(p, l)) throw ValidationError("sweep csv: bad header");
    std::vector<SweepRecord> out;
    for (std::size_t t = 1; t < lines.size(); ++t) {
        std::vector<std::string> c;
        std::size_t start = 0;
        const std::string& line = lines[t];
        for (std::size_t q = 0; q <= line.size(); ++q)
            if (q == line.size() || line[q] == ',') {
                c.emplace_back(line.substr(start, q - start));
                start = q + 1;
            }
        if (static_cast<int>(c.size()) != 12 + 8 * p + 3 * l)
            throw ValidationError("sweep csv: bad column count");
        SweepRecord r;
        std::size_t q = 0;
        r.lambda = parse_double(c[q++]);
        r.h = parse_double(c[q++]);
        r.delta = parse_double(c[q++]);
        r.converged = parse_long(c[q++]) != 0;
        r.iterations = static_cast<int>(parse_long(c[q++]));
        r.energy = parse_double(c[q++]);
        r.background_energy = parse_double(c[q++]);
        r.kinetic = parse_double(c[q++]);
        r.max_weak_residual = parse_double(c[q++]);
        r.max_first_order = parse_double(c[q++]);
        r.diag.energy_compensated = parse_double(c[q++]);
        r.diag.threshold_sum_compensated = parse_double(c[q++]);
        r.diag.background_energy = r.background_energy;
        for (int i = 0; i < p; ++i) {
            r.eps.push_back(parse_double(c[q++]));
            r.diam.push_back(parse_double(c[q++]));
            const double zx = parse_double(c[q++]), zy = parse_double(c[q++]);
            r.centers.push_back({zx, zy});
            r.center_dist.push_back(parse_double(c[q++]));
            r.thresholds.push_back(parse_double(c[q++]));
            r.diag.threshold_vs_log_delta.push_back(parse_double(c[q++]));
            r.diag.outer_ring_excess.push_back(parse_double(c[q++]));
        }
        for (int j = 0; j < l; ++j) {
            const double px = parse_double(c[q++]), py = parse_double(c[q++]);
            r.points.push_back({px, py});
            r.point_dist.push_back(parse_double(c[q++]));
        }
        out.push_back(std::move(r));
    }
    return out;
}

// --- drift report -----------------------------------------------------------

namespace detail {

inline void write_drift_core(std::string& s, const DriftCore& c) {
    s += "centroid_drift = " + join_doubles(c.centroid_drift) + "\n";
    s += "diameter_change = " + join_doubles(c.diameter_change) + "\n";
    s += "point_displacement = " + join_doubles(c.point_displacement) + "\n";
    s += "energy_drift_rel = " + fmt(c.energy_drift_rel) + "\n";
}

inline DriftCore read_drift_core(const Record& rec, const std::string& section) {
    DriftCore c;
    c.centroid_drift = parse_double_list(rec.need(section, "centroid_drift"));
    c.diameter_change = parse_double_list(rec.need(section, "diameter_change"));
    c.point_displacement = parse_double_list(rec.need(section, "point_displacement"));
    c.energy_drift_rel = parse_double(rec.need(section, "energy_drift_rel"));
    return c;
}

} // namespace detail

inline std::string serialize_drift(const DriftReport& rep) {
    std::string s = "vwpatch-drift " + fmt(kSchemaVersion) + "\n";
    s += "t_end = " + fmt(rep.t_end) + "\n";
    s += "dt = " + fmt(rep.dt) + "\n";
    s += "restarts = " + fmt(rep.restarts) + "\n";
    s += "[steady]\n";
    detail::write_drift_core(s, rep.steady);
    if (rep.control) {
        s += "[control]\n";
        detail::write_drift_core(s, *rep.control);
    }
    return s;
}

inline DriftReport load_drift(const std::string& text) {
    const auto rec = detail::parse_record(text, "drift");
    DriftReport rep;
    rep.t_end = parse_double(rec.need("", "t_end"));
    rep.dt = parse_double(rec.need("", "dt"));
    rep.restarts = static_cast<int>(parse_long(rec.need("", "restarts")));
    rep.steady = detail::read_drift_core(rec, "steady");
    if (rec.find("control", "energy_drift_rel"))
        rep.control = detail::read_drift_core(rec, "control");
    return rep;
}

// --- simulation trajectory csv ----------------------------------------------

inline std::string serialize_snapshots_csv(const DriftReport& rep, int p, int l) {
    std::string s = "t";
    for (int i = 1; i <= p; ++i)
        s += ",cx" + std::to_string(i) + ",cy" + std::to_string(i) + ",diam" + std::to_string(i);
    for (int j = 1; j <= l; ++j) s += ",px" + std::to_string(j) + ",py" + std::to_string(j);
    s += "\n";
    for (const SimulationSnapshot& sn : rep.snapshots) {
        s += fmt(sn.t);
        for (int i = 0; i < p; ++i)
            s += "," + fmt(sn.centroids[i].x) + "," + fmt(sn.centroids[i].y) + "," +
                 fmt(sn.diameters[i]);
        for (int j = 0; j < l; ++j) s += "," + fmt(sn.points[j].x) + "," + fmt(sn.points[j].y);
        s += "\n";
    }
    return s;
}

// --- point-vortex trajectory csv ---------------------------------------------

inline std::string serialize_trajectory_csv(const Trajectory& traj) {
    std::string s = "t";
    for (std::size_t i = 1; i <= traj.strengths.size(); ++i)
        s += ",x" + std::to_string(i) + ",y" + std::to_string(i);
    s += "\n";
    for (std::size_t t = 0; t < traj.times.size(); ++t) {
        s += fmt(traj.times[t]);
        for (const Vec2& pos : traj.states[t]) s += "," + fmt(pos.x) + "," + fmt(pos.y);
        s += "\n";
    }
    return s;
}

} // namespace vwp
