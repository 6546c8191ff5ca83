#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "vwpatch/serialize.hpp"

// Command layer shared by the CLI and the tests: each command produces a
// result bundle, a directory of versioned records listed in manifest.txt
// with sizes and FNV-1a hashes. Wall-clock data lives only in
// provenance.txt, which is neither hashed nor compared.

namespace vwp {

enum ExitCode : int {
    kExitOk = 0,
    kExitValidation = 2,
    kExitNonConvergence = 3,
    kExitNumerical = 4,
};

namespace detail {

namespace fs = std::filesystem;

struct BundleWriter {
    fs::path dir;
    std::string command;
    std::vector<std::pair<std::string, std::string>> files; // name -> content
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    BundleWriter(fs::path d, std::string c) : dir(std::move(d)), command(std::move(c)) {}

    void add(const std::string& name, std::string content) {
        files.emplace_back(name, std::move(content));
    }

    void commit() const {
        fs::create_directories(dir);
        std::string manifest = "vwpatch-bundle " + fmt(kSchemaVersion) + "\n";
        manifest += "tool_version = " + std::string(kToolVersion) + "\n";
        manifest += "command = " + command + "\n";
        manifest += "[files]\n";
        for (const auto& [name, content] : files) {
            write_file((dir / name).string(), content);
            manifest += name + " = " + std::to_string(content.size()) + " " +
                        hex64(fnv1a(content)) + "\n";
        }
        write_file((dir / "manifest.txt").string(), manifest);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        std::string prov = "vwpatch-provenance " + fmt(kSchemaVersion) + "\n";
        prov += "created_unix = " +
                std::to_string(std::chrono::duration_cast<std::chrono::seconds>(
                                   std::chrono::system_clock::now().time_since_epoch())
                                   .count()) +
                "\n";
        prov += "wall_seconds = " + fmt(wall) + "\n";
        write_file((dir / "provenance.txt").string(), prov);
    }
};

inline void prepare_outdir(const fs::path& dir, bool force) {
    if (fs::exists(dir) && !fs::is_empty(dir) && !force)
        throw ValidationError("output directory '" + dir.string() +
                              "' is not empty; pass --force to overwrite");
}

inline std::vector<Vec2> resolve_seeds(const RunConfig& cfg, KRPoint* kr_out = nullptr) {
    if (!cfg.seeds_auto) return cfg.seeds;
    PointVortexSystem seed{cfg.seeds, cfg.strengths};
    KRMinOptions opts;
    opts.gradient_tol = cfg.kr_gradient_tol;
    opts.max_iterations = cfg.kr_max_iterations;
    opts.hessian_step = cfg.kr_hessian_step;
    const KRPoint kr = kr_local_min(seed, cfg.kr_search_radius, opts);
    if (kr_out) *kr_out = kr;
    return kr.positions;
}

} // namespace detail

struct KRMinOutcome {
    KRPoint point;
    int exit_code = kExitOk;
};

inline KRMinOutcome cmd_kr_min(const RunConfig& cfg, const std::string& outdir, bool force) {
    detail::prepare_outdir(outdir, force);
    detail::BundleWriter bundle{outdir, "kr-min"};
    PointVortexSystem seed{cfg.seeds, cfg.strengths};
    KRMinOptions opts;
    opts.gradient_tol = cfg.kr_gradient_tol;
    opts.max_iterations = cfg.kr_max_iterations;
    opts.hessian_step = cfg.kr_hessian_step;
    const KRPoint kr = kr_local_min(seed, cfg.kr_search_radius, opts);
    bundle.add("config.cfg", serialize_config(cfg));
    bundle.add("krpoint.txt", serialize_krpoint(kr));
    bundle.commit();
    return {kr, kExitOk};
}

struct SolveOutcome {
    PatchSolution solution;
    SolutionDiagnostics diagnostics;
    int exit_code = kExitOk;
};

inline SolveOutcome cmd_solve(const RunConfig& cfg, const std::string& outdir, bool force) {
    if (!cfg.lambda) throw ValidationError("solve: config needs a single patch.lambda");
    detail::prepare_outdir(outdir, force);
    detail::BundleWriter bundle{outdir, "solve"};

    KRPoint kr;
    const std::vector<Vec2> seeds = detail::resolve_seeds(cfg, &kr);
    PatchProblem pb = cfg.to_patch_problem(seeds);
    SolveOutcome out;
    out.solution = solve(pb);
    out.diagnostics = compute_diagnostics(out.solution);
    out.exit_code = out.solution.converged ? kExitOk : kExitNonConvergence;

    bundle.add("config.cfg", serialize_config(cfg));
    if (cfg.seeds_auto) bundle.add("krpoint.txt", serialize_krpoint(kr));
    bundle.add("solution.txt", serialize_solution(out.solution));
    bundle.add("psi.csv", serialize_psi_csv(out.solution));
    bundle.add("diagnostics.txt", serialize_diagnostics(out.diagnostics));
    bundle.commit();
    return out;
}

struct SweepOutcome {
    std::vector<SweepRecord> records;
    ScalingFit fit;
    CenterConvergenceReport centers;
    BoundsReport bounds;
    bool fits_valid = false;
    int exit_code = kExitOk;
};

inline std::string serialize_sweep_summary(const SweepOutcome& out, bool warm_started) {
    std::string s = "vwpatch-sweep-summary " + fmt(kSchemaVersion) + "\n";
    s += "warm_start = " + fmt(warm_started) + "\n";
    int conv = 0;
    for (const SweepRecord& r : out.records) conv += r.converged ? 1 : 0;
    s += "records = " + fmt(static_cast<int>(out.records.size())) + "\n";
    s += "converged = " + fmt(conv) + "\n";
    if (out.fits_valid) {
        s += "[diameter_scaling]\n";
        s += "exponent = " + fmt(out.fit.exponent) + "\n";
        s += "intercept = " + fmt(out.fit.intercept) + "\n";
        s += "rms_residual = " + fmt(out.fit.rms_residual) + "\n";
        s += "lambda_range = " + fmt(out.fit.lambda_min) + " " + fmt(out.fit.lambda_max) + "\n";
        s += "max_diam_over_eps = " + fmt(out.fit.max_diam_over_eps) + "\n";
        s += "[center_convergence]\n";
        s += "passed = " + fmt(out.centers.passed) + "\n";
        for (const std::string& f : out.centers.findings) s += "finding = " + f + "\n";
        s += "[bounds]\n";
        s += "passed = " + fmt(out.bounds.passed) + "\n";
        for (const BoundsCheck& c : out.bounds.checks) {
            s += c.name + " = " + (c.passed ? "pass" : "FAIL") + " edges " +
                 fmt(c.edge_first_half) + " " + fmt(c.edge_second_half) + " tol " +
                 fmt(c.tolerance);
            if (c.name == "outer_ring_excess_nonpositive") s += " worst " + fmt(c.worst);
            s += "\n";
        }
    }
    return s;
}

inline SweepOutcome cmd_sweep(const RunConfig& cfg, const std::string& outdir, bool force,
                              int jobs = 1) {
    if (cfg.lambdas.empty()) throw ValidationError("sweep: config needs patch.lambdas");
    detail::prepare_outdir(outdir, force);
    detail::BundleWriter bundle{outdir, "sweep"};

    KRPoint kr;
    const std::vector<Vec2> seeds = detail::resolve_seeds(cfg, &kr);
    PatchProblem pb = cfg.to_patch_problem(seeds);
    pb.lambda = cfg.lambdas.front();

    const bool warm = jobs <= 1;
    SweepOutcome out;
    out.records = sweep(pb, cfg.lambdas, warm, jobs);
    int conv = 0;
    for (const SweepRecord& r : out.records) conv += r.converged ? 1 : 0;
    out.exit_code = conv == static_cast<int>(out.records.size()) ? kExitOk : kExitNonConvergence;
    try {
        out.fit = fit_diameter_scaling(out.records);
        out.centers = check_center_convergence(out.records);
        out.bounds = check_bounds(out.records);
        out.fits_valid = true;
    } catch (const ValidationError&) {
        out.fits_valid = false; // too few converged records; summary says so
    }

    bundle.add("config.cfg", serialize_config(cfg));
    if (cfg.seeds_auto) bundle.add("krpoint.txt", serialize_krpoint(kr));
    bundle.add("sweep.csv", serialize_sweep_csv(out.records));
    bundle.add("summary.txt", serialize_sweep_summary(out, warm));
    bundle.commit();
    return out;
}

struct SimulateOutcome {
    DriftReport report;
    int exit_code = kExitOk;
};

// Simulates a stored solve bundle (seed_bundle) or solves fresh from the
// config when no bundle is given.
inline SimulateOutcome cmd_simulate(const RunConfig& cfg, const std::string& seed_bundle,
                                    const std::string& outdir, bool force) {
    detail::prepare_outdir(outdir, force);
    detail::BundleWriter bundle{outdir, "simulate"};

    PatchSolution sol;
    if (!seed_bundle.empty()) {
        namespace fs = std::filesystem;
        sol = load_solution(read_file((fs::path(seed_bundle) / "solution.txt").string()));
        load_psi_csv(read_file((fs::path(seed_bundle) / "psi.csv").string()), sol);
    } else {
        if (!cfg.lambda) throw ValidationError("simulate: config needs patch.lambda");
        sol = solve(cfg.to_patch_problem(detail::resolve_seeds(cfg)));
    }
    if (!sol.converged)
        throw ValidationError("simulate: refusing to simulate a non-converged solution");

    const double turnover = turnover_time(sol);
    const double t_end = cfg.sim_turnovers * turnover;
    // default step: 2000 per turnover of the slowest patch, which resolves
    // the fastest patch self-rotation at these lambda ranges
    const double dt = cfg.sim_dt > 0.0 ? cfg.sim_dt : turnover / 2000.0;
    SimulateOutcome out;
    out.report = simulate_steadiness(sol, t_end, dt, cfg.sim_control);

    bundle.add("config.cfg", serialize_config(cfg));
    bundle.add("drift.txt", serialize_drift(out.report));
    bundle.add("trajectory.csv",
               serialize_snapshots_csv(out.report, sol.problem.p, sol.problem.l()));
    bundle.commit();
    return out;
}

struct ValidateOutcome {
    bool passed = true;
    std::vector<std::string> lines; // one "check: pass/FAIL detail" per check
    int exit_code = kExitOk;

    void check(const std::string& name, bool ok, const std::string& detail_msg = "") {
        passed = passed && ok;
        lines.push_back(name + ": " + (ok ? "pass" : "FAIL") +
                        (detail_msg.empty() ? "" : " (" + detail_msg + ")"));
    }
};

// Re-verifies a stored bundle: manifest hashes, record round-trips, and
// for solve bundles the recomputed stream field, diagnostics, bang-bang
// structure and confinement.
inline ValidateOutcome cmd_validate(const std::string& bundle_dir) {
    namespace fs = std::filesystem;
    ValidateOutcome out;
    const fs::path dir(bundle_dir);
    if (!fs::exists(dir / "manifest.txt"))
        throw ValidationError("validate: no manifest.txt in '" + bundle_dir + "'");

    const auto manifest = detail::parse_record(read_file((dir / "manifest.txt").string()), "bundle");
    std::string command = manifest.need("", "command");

    std::map<std::string, std::string> contents;
    for (const auto& kv : manifest.entries) {
        if (kv.section != "files") continue;
        if (!fs::exists(dir / kv.key)) {
            out.check("file " + kv.key + " exists", false);
            continue;
        }
        const std::string data = read_file((dir / kv.key).string());
        const auto parts = split_ws(kv.value);
        const bool ok = parts.size() == 2 &&
                        parse_long(parts[0]) == static_cast<long>(data.size()) &&
                        parts[1] == hex64(fnv1a(data));
        out.check("manifest hash of " + kv.key, ok);
        contents[kv.key] = data;
    }

    auto roundtrip = [&](const std::string& name, auto loader, auto serializer) {
        auto it = contents.find(name);
        if (it == contents.end()) return;
        try {
            out.check("round-trip " + name, serializer(loader(it->second)) == it->second);
        } catch (const Error& e) {
            out.check("round-trip " + name, false, e.what());
        }
    };
    roundtrip("config.cfg", [](const std::string& s) { return parse_config(s); },
              [](const RunConfig& c) { return serialize_config(c); });
    roundtrip("krpoint.txt", [](const std::string& s) { return load_krpoint(s); },
              [](const KRPoint& k) { return serialize_krpoint(k); });
    roundtrip("solution.txt", [](const std::string& s) { return load_solution(s); },
              [](const PatchSolution& s) { return serialize_solution(s); });
    roundtrip("diagnostics.txt", [](const std::string& s) { return load_diagnostics(s); },
              [](const SolutionDiagnostics& d) { return serialize_diagnostics(d); });
    roundtrip("drift.txt", [](const std::string& s) { return load_drift(s); },
              [](const DriftReport& d) { return serialize_drift(d); });
    roundtrip("sweep.csv", [](const std::string& s) { return load_sweep_csv(s); },
              [](const std::vector<SweepRecord>& r) { return serialize_sweep_csv(r); });

    if (contents.count("solution.txt")) {
        try {
            PatchSolution sol = load_solution(contents.at("solution.txt"));
            const PatchProblem& pb = sol.problem;

            // stream field: recompute from the cell sets and compare bytes
            if (contents.count("psi.csv")) {
                sol.psi = poisson_solve(sol.omega);
                out.check("psi.csv matches recomputed stream field",
                          serialize_psi_csv(sol) == contents.at("psi.csv"));
            }
            // bang-bang purity and confinement
            bool confined = true;
            for (int i = 0; i < pb.p; ++i)
                for (int c : sol.cells[i])
                    confined = confined &&
                               dist(sol.grid->center_of(c), pb.seeds[i]) < pb.delta;
            for (int j = 0; j < pb.l(); ++j)
                confined = confined && dist(sol.points[j], pb.seeds[pb.p + j]) <= pb.delta + 1e-15;
            out.check("confinement of cells and points", confined);

            // circulation within one cell of kappa_i
            bool circ_ok = true;
            const double h2 = sol.grid->cell_area();
            for (int i = 0; i < pb.p; ++i) {
                const double got = (pb.strengths[i] > 0 ? 1.0 : -1.0) * pb.lambda * h2 *
                                   static_cast<double>(sol.cells[i].size());
                circ_ok = circ_ok && std::abs(got - pb.strengths[i]) <= pb.lambda * h2;
            }
            out.check("patch circulations", circ_ok);

            if (sol.converged && contents.count("psi.csv")) {
                // superlevel structure against the stored threshold
                bool superlevel = true;
                for (int i = 0; i < pb.p; ++i) {
                    const auto ball = patch_ball_cells(sol, i);
                    const auto f = combined_field(sol, i, ball);
                    double min_in = std::numeric_limits<double>::infinity();
                    double max_out = -std::numeric_limits<double>::infinity();
                    for (std::size_t t = 0; t < ball.size(); ++t) {
                        const bool in = std::binary_search(sol.cells[i].begin(),
                                                           sol.cells[i].end(), ball[t]);
                        if (in)
                            min_in = std::min(min_in, f[t]);
                        else
                            max_out = std::max(max_out, f[t]);
                    }
                    superlevel = superlevel && min_in >= max_out - 1e-12 &&
                                 std::abs(max_out - sol.thresholds[i]) <= 1e-12;
                }
                out.check("superlevel structure at stored thresholds", superlevel);
            }
            if (contents.count("diagnostics.txt")) {
                out.check("diagnostics match recomputation",
                          serialize_diagnostics(compute_diagnostics(sol)) ==
                              contents.at("diagnostics.txt"));
            }
        } catch (const Error& e) {
            out.check("solution re-verification", false, e.what());
        }
    }

    out.exit_code = out.passed ? kExitOk : kExitValidation;
    return out;
}

} // namespace vwp
