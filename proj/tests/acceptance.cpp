// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exits nonzero on any failure.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "vwpatch/asymptotics.hpp"
#include "vwpatch/commands.hpp"
#include "vwpatch/serialize.hpp"
#include "vwpatch/vortex_wave.hpp"

using namespace vwp;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string source_dir; // set from argv

// --- shared regression artifacts (computed once, reused across criteria) --

PatchProblem radial_problem(double lambda, int n, int min_cells = 8) {
    PatchProblem pb;
    pb.strengths = {1.0};
    pb.p = 1;
    pb.seeds = {{0.0, 0.0}};
    pb.lambda = lambda;
    pb.grid_n = n;
    pb.min_patch_cells = min_cells;
    return pb;
}

PatchProblem dipole_problem(const KRPoint& kr, double lambda, int n) {
    PatchProblem pb;
    pb.strengths = {1.0, -1.0};
    pb.p = 1;
    pb.seeds = kr.positions;
    pb.lambda = lambda;
    pb.grid_n = n;
    return pb;
}

struct Shared {
    KRPoint dipole_min;
    std::vector<SweepRecord> sweep256;        // criterion 7/8 ladder at n=256
    std::vector<SweepRecord> bounds_single;   // n=640 ladder
    std::vector<SweepRecord> bounds_dipole;   // n=640 ladder
    PatchSolution radial192;
    PatchSolution radial384;
    PatchSolution dipole192;
    PatchSolution dipole384;
    std::vector<const PatchSolution*> converged;
    std::vector<std::vector<double>> histories;

    void build() {
        dipole_min = kr_local_min({{{0.3, 0.0}, {-0.3, 0.0}}, {1.0, -1.0}}, 0.25);
        const std::vector<double> ladder{200.0, 800.0, 3200.0, 12800.0};

        std::fprintf(stderr, "[acceptance] sweep n=256 ...\n");
        sweep256 = sweep(radial_problem(200.0, 256, 1), ladder);
        std::fprintf(stderr, "[acceptance] bounds sweeps n=640 ...\n");
        bounds_single = sweep(radial_problem(200.0, 640), ladder);
        bounds_dipole = sweep(dipole_problem(dipole_min, 200.0, 640), ladder);
        std::fprintf(stderr, "[acceptance] residual/steadiness solves ...\n");
        radial192 = solve(radial_problem(200.0, 192));
        radial384 = solve(radial_problem(200.0, 384));
        dipole192 = solve(dipole_problem(dipole_min, 200.0, 192));
        dipole384 = solve(dipole_problem(dipole_min, 200.0, 384));
        for (const PatchSolution* s : {&radial192, &radial384, &dipole192, &dipole384}) {
            if (s->converged) converged.push_back(s);
            histories.push_back(s->energy_history);
        }
    }
};

Shared shared;

// --- criteria ---------------------------------------------------------------

Outcome criterion_kernels() {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto rand_pt = [&](double rmax) {
        const double r = rmax * std::sqrt(unif(rng)), th = 2.0 * pi * unif(rng);
        return Vec2{r * std::cos(th), r * std::sin(th)};
    };
    double worst = 0.0;
    auto rel = [](double got, double want) {
        return std::abs(got - want) / std::max(std::abs(want), 1e-12);
    };
    for (int t = 0; t < 100; ++t) {
        const Vec2 x = rand_pt(0.9);
        Vec2 y = rand_pt(0.9);
        while (dist(x, y) < 0.05) y = rand_pt(0.9);

        // closed forms
        const double q = norm2(x) * norm2(y) - 2.0 * dot(x, y) + 1.0;
        worst = std::max(worst, rel(green_disk(x, y),
                                    std::log(q / norm2(x - y)) / (4.0 * pi)));
        worst = std::max(worst, rel(robin_H(x), -std::log(1.0 - norm2(x)) / (4.0 * pi)));

        // finite-difference cross checks
        const double s = 1e-5;
        const Vec2 gG = grad_green_disk(x, y);
        const Vec2 fdG{(green_disk({x.x + s, x.y}, y) - green_disk({x.x - s, x.y}, y)) / (2 * s),
                       (green_disk({x.x, x.y + s}, y) - green_disk({x.x, x.y - s}, y)) / (2 * s)};
        worst = std::max(worst, norm(gG - fdG) / std::max(norm(fdG), 1e-12));
        const Vec2 gH = grad_H(x);
        const Vec2 fdH{(robin_H({x.x + s, x.y}) - robin_H({x.x - s, x.y})) / (2 * s),
                       (robin_H({x.x, x.y + s}) - robin_H({x.x, x.y - s})) / (2 * s)};
        worst = std::max(worst, norm(gH - fdH) / std::max(norm(fdH), 1e-12));
    }
    std::ostringstream d;
    d << "worst relative error " << worst;
    return {worst < 1e-6, d.str()};
}

Outcome criterion_poisson() {
    auto patch_error = [](int n) {
        auto spec = GridSpec::make(n);
        const double h2 = spec->cell_area();
        const long m = std::max(1L, std::lround(pi * 0.02 * 0.02 / h2));
        std::vector<int> cells = spec->interior_cells;
        std::sort(cells.begin(), cells.end(), [&](int a, int b) {
            const double da = norm(spec->center_of(a)), db = norm(spec->center_of(b));
            if (da != db) return da < db;
            return a < b;
        });
        cells.resize(m);
        GridField omega(spec);
        for (int c : cells) omega.set(c, 1.0 / (static_cast<double>(m) * h2));
        const GridField psi = poisson_solve(omega);
        int tgt = spec->interior_cells.front();
        for (int idx : spec->interior_cells)
            if (dist(spec->center_of(idx), {0.5, 0.0}) < dist(spec->center_of(tgt), {0.5, 0.0}))
                tgt = idx;
        const double exact = green_disk({0, 0}, spec->center_of(tgt));
        return std::abs(psi.values[tgt] - exact) / std::abs(exact);
    };
    const double e64 = patch_error(64), e128 = patch_error(128), e256 = patch_error(256);
    std::ostringstream d;
    d << "errors " << e64 << " -> " << e128 << " -> " << e256;
    return {e256 < 0.02 && e128 < e64 && e256 < e128, d.str()};
}

Outcome criterion_kr() {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    double worst_rel = 0.0, worst_dist = 0.0;
    for (int t = 0; t < 20; ++t) {
        const Vec2 x{0.5 * unif(rng), 0.5 * unif(rng)};
        const double kappa = unif(rng) > 0 ? 1.0 + unif(rng) : -1.0 + unif(rng);
        if (norm(x) < 1e-3 || std::abs(kappa) < 0.1) continue;
        const double want = 2.0 * kappa * kappa * robin_H(x);
        worst_rel = std::max(worst_rel,
                             std::abs(kr_value({{x}, {kappa}}) - want) / std::abs(want));
    }
    for (int t = 0; t < 20; ++t) {
        const Vec2 seed{0.45 * unif(rng), 0.45 * unif(rng)};
        const KRPoint kr = kr_local_min({{seed}, {1.0}}, 0.6);
        worst_dist = std::max(worst_dist, norm(kr.positions[0]));
    }
    std::ostringstream d;
    d << "k=1 identity rel " << worst_rel << ", worst distance to origin " << worst_dist;
    return {worst_rel < 1e-13 && worst_dist < 1e-6, d.str()};
}

Outcome criterion_pv_dynamics() {
    const double T = 2.0 * pi * pi;
    const PointVortexSystem pair{{{0.5, 0.0}, {-0.5, 0.0}}, {1.0, 1.0}};
    const Trajectory traj = integrate_pv(pair, PvModel::plane, T / 2000.0, T);
    const double ret = std::max(dist(traj.states.back()[0], pair.positions[0]),
                                dist(traj.states.back()[1], pair.positions[1]));

    double worst_drift = 0.0;
    const PointVortexSystem two{{{0.4, 0.0}, {-0.35, 0.1}}, {1.0, 0.8}};
    const PointVortexSystem three{{{0.4, 0.0}, {-0.3, 0.25}, {0.05, -0.4}}, {1.0, -0.7, 1.2}};
    for (const auto& sys : {two, three}) {
        const Trajectory tr = integrate_pv(sys, PvModel::disk, 1e-3, 10.0);
        const double k0 = kr_value({tr.states.front(), sys.strengths});
        for (std::size_t s = 0; s < tr.states.size(); s += 200) {
            const double kt = kr_value({tr.states[s], sys.strengths});
            worst_drift = std::max(worst_drift, std::abs(kt - k0) / std::abs(k0));
        }
    }
    std::ostringstream d;
    d << "period return " << ret << ", worst K drift " << worst_drift;
    return {ret < 1e-4 && worst_drift < 1e-6, d.str()};
}

Outcome criterion_ascent() {
    std::size_t sequences = 0;
    for (const auto& hist : shared.histories) {
        ++sequences;
        for (std::size_t t = 1; t < hist.size(); ++t)
            if (hist[t] < hist[t - 1] - 1e-12 * (1.0 + std::abs(hist[t - 1])))
                return {false, "energy decreased in sequence " + std::to_string(sequences)};
    }
    return {true, std::to_string(sequences) + " histories nondecreasing"};
}

Outcome criterion_profile() {
    int checked = 0;
    for (const PatchSolution* sp : shared.converged) {
        const PatchSolution& sol = *sp;
        for (int idx : sol.grid->interior_cells) {
            const double v = sol.omega.values[idx];
            const double lam = sol.problem.lambda;
            if (v != 0.0 && v != lam && v != -lam)
                return {false, "bang-bang purity violated"};
        }
        for (int i = 0; i < sol.problem.p; ++i) {
            const auto ball = patch_ball_cells(sol, i);
            const auto f = combined_field(sol, i, ball);
            double min_in = std::numeric_limits<double>::infinity(), max_out = -min_in;
            double second_in = min_in;
            for (std::size_t t = 0; t < ball.size(); ++t) {
                if (std::binary_search(sol.cells[i].begin(), sol.cells[i].end(), ball[t])) {
                    if (f[t] < min_in) {
                        second_in = min_in;
                        min_in = f[t];
                    } else {
                        second_in = std::min(second_in, f[t]);
                    }
                } else {
                    max_out = std::max(max_out, f[t]);
                }
            }
            const double quantum = std::max(second_in - min_in, 0.0);
            if (!(min_in >= max_out - quantum - 1e-12))
                return {false, "superlevel consistency violated"};
        }
        ++checked;
    }
    return {checked > 0, std::to_string(checked) + " converged solutions satisfy the profile"};
}

Outcome criterion_scaling() {
    for (const auto& r : shared.sweep256)
        if (!r.converged) return {false, "sweep rung did not converge"};
    const ScalingFit fit = fit_diameter_scaling(shared.sweep256);
    std::ostringstream d;
    d << "slope " << fit.exponent << ", max diam/eps " << fit.max_diam_over_eps;
    return {fit.exponent > -0.6 && fit.exponent < -0.4 && fit.max_diam_over_eps < 4.0, d.str()};
}

Outcome criterion_centers() {
    double worst256 = 0.0;
    for (const auto& r : shared.sweep256) worst256 = std::max(worst256, r.center_dist[0]);
    const double two_h = 2.0 * shared.sweep256.front().h;

    const SweepRecord& last = shared.bounds_dipole.back();
    const double four_h = 4.0 * last.h;
    std::ostringstream d;
    d << "max |z| " << worst256 << " (2h " << two_h << "), dipole final |z-seed| "
      << last.center_dist[0] << " |x-seed| " << last.point_dist[0] << " (4h " << four_h << ")";
    const bool ok = worst256 < two_h && last.converged && last.center_dist[0] < four_h &&
                    last.point_dist[0] < four_h;
    return {ok, d.str()};
}

Outcome criterion_bounds() {
    const BoundsReport a = check_bounds(shared.bounds_single);
    const BoundsReport b = check_bounds(shared.bounds_dipole);
    std::string failing;
    for (const auto& rep : {a, b})
        for (const auto& c : rep.checks)
            if (!c.passed) failing += " " + c.name;
    if (!failing.empty()) return {false, "failing checks:" + failing};
    return {true, std::to_string(a.checks.size()) + "+" + std::to_string(b.checks.size()) +
                      " checks pass on both regression sweeps"};
}

Outcome criterion_weak() {
    auto max_weak = [](const PatchSolution& sol) {
        double worst = 0.0;
        for (const WeakResidual& w : weak_residual(sol)) worst = std::max(worst, w.normalized);
        return worst;
    };
    const double r192 = max_weak(shared.radial192), r384 = max_weak(shared.radial384);
    const double d192 = max_weak(shared.dipole192), d384 = max_weak(shared.dipole384);
    double worst_fo = 0.0;
    for (const PatchSolution* s : {&shared.dipole192, &shared.dipole384})
        for (double fo : first_order_residual(*s)) worst_fo = std::max(worst_fo, fo);
    std::ostringstream d;
    d << "weak " << r192 << "->" << r384 << " (radial), " << d192 << "->" << d384
      << " (dipole), first-order " << worst_fo;
    const bool ok = r192 < 1e-2 && d192 < 1e-2 && r384 < r192 && d384 < d192 &&
                    worst_fo < shared.dipole192.problem.point_tol;
    return {ok, d.str()};
}

Outcome criterion_steadiness() {
    const PatchSolution& sol = shared.dipole192;
    if (!sol.converged) return {false, "dipole n=192 did not converge"};
    const double turnover = turnover_time(sol);
    const DriftReport rep = simulate_steadiness(sol, 3.0 * turnover, turnover / 2000.0, true);
    const double drift = rep.steady.centroid_drift[0];
    const double limit = 0.05 * sol.diameters[0];
    const double contrast = rep.control->centroid_drift[0] / std::max(drift, 1e-30);
    std::ostringstream d;
    d << "drift " << drift << " (limit " << limit << "), control/steady " << contrast << "x, "
      << discretize(sol).particle_pos.size() + 1 << " bodies";
    return {drift < limit && contrast >= 5.0, d.str()};
}

Outcome criterion_persistence() {
    const fs::path tmp = fs::temp_directory_path() / "vwpatch_acceptance";
    fs::remove_all(tmp);
    const fs::path golden = fs::path(source_dir) / "tests" / "golden" / "single_patch_n64";
    if (!fs::exists(golden / "manifest.txt"))
        return {false, "golden bundle missing at " + golden.string()};

    const RunConfig cfg = load_config((golden / "config.cfg").string());
    const fs::path d1 = tmp / "run1", d2 = tmp / "run2";
    cmd_solve(cfg, d1.string(), false);
    cmd_solve(cfg, d2.string(), false);

    const std::vector<std::string> names{"manifest.txt", "config.cfg", "solution.txt", "psi.csv",
                                         "diagnostics.txt"};
    for (const auto& name : names) {
        const std::string fresh = read_file((d1 / name).string());
        if (fresh != read_file((d2 / name).string()))
            return {false, name + " differs between reruns"};
        if (fresh != read_file((golden / name).string()))
            return {false, name + " differs from the committed golden bundle"};
    }

    if (!cmd_validate(d1.string()).passed) return {false, "fresh bundle fails validation"};

    // round trips
    const PatchSolution sol = load_solution(read_file((d1 / "solution.txt").string()));
    if (serialize_solution(sol) != read_file((d1 / "solution.txt").string()))
        return {false, "solution round trip not exact"};

    // tamper detection: flip one digit in the psi field
    std::string text = read_file((d1 / "psi.csv").string());
    const std::size_t pos = text.find_last_of("123456789");
    text[pos] = text[pos] == '3' ? '4' : '3';
    write_file((d1 / "psi.csv").string(), text);
    const ValidateOutcome bad = cmd_validate(d1.string());
    if (bad.passed) return {false, "tampered psi.csv passed validation"};
    bool named = false;
    for (const std::string& line : bad.lines)
        if (line.find("psi.csv") != std::string::npos && line.find("FAIL") != std::string::npos)
            named = true;
    fs::remove_all(tmp);
    if (!named) return {false, "tamper report does not name psi.csv"};
    return {true, "golden equality, exact round trips, tamper detection"};
}

} // namespace

int main(int argc, char** argv) {
    source_dir = argc > 1 ? argv[1] : ".";
    shared.build();

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"01 kernel exactness", criterion_kernels},
        {"02 poisson oracle", criterion_poisson},
        {"03 kirchhoff-routh consistency", criterion_kr},
        {"04 point-vortex dynamics", criterion_pv_dynamics},
        {"05 ascent invariant", criterion_ascent},
        {"06 patch profile", criterion_profile},
        {"07 diameter scaling", criterion_scaling},
        {"08 center convergence", criterion_centers},
        {"09 bound diagnostics", criterion_bounds},
        {"10 weak-solution residuals", criterion_weak},
        {"11 dynamical steadiness", criterion_steadiness},
        {"12 determinism and persistence", criterion_persistence},
    };

    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome out;
        try {
            out = fn();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        std::printf("criterion %s: %s (%s)\n", name.c_str(), out.pass ? "PASS" : "FAIL",
                    out.detail.c_str());
        std::fflush(stdout);
        if (!out.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
