// Command-line front end: kr-min, solve, sweep, simulate, validate.
// Exit codes: 0 ok, 2 validation error, 3 non-convergence, 4 numerical
// error. Errors are printed as machine-readable key = value lines.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "vwpatch/commands.hpp"

namespace {

void print_error(const char* kind, const std::string& what) {
    std::fprintf(stderr, "error = %s\nmessage = %s\n", kind, what.c_str());
}

int dispatch(const std::string& cmd, const std::string& config_path, const std::string& out_dir,
             bool force, int jobs, const std::string& seed_from, const std::string& bundle) {
    if (cmd == "validate") {
        const vwp::ValidateOutcome v = vwp::cmd_validate(bundle);
        for (const std::string& line : v.lines) std::printf("%s\n", line.c_str());
        std::printf("validate: %s\n", v.passed ? "PASS" : "FAIL");
        return v.exit_code;
    }

    const vwp::RunConfig cfg = vwp::load_config(config_path);
    if (cmd == "kr-min") {
        const auto r = vwp::cmd_kr_min(cfg, out_dir, force);
        std::printf("kr-min: value = %s gradient_norm = %s hessian_pd = %d (mod rotation %d)\n",
                    vwp::fmt(r.point.value).c_str(), vwp::fmt(r.point.gradient_norm).c_str(),
                    r.point.hessian_pd ? 1 : 0, r.point.hessian_pd_mod_rotation ? 1 : 0);
        return r.exit_code;
    }
    if (cmd == "solve") {
        const auto r = vwp::cmd_solve(cfg, out_dir, force);
        std::printf("solve: converged = %d iterations = %d energy = %s\n",
                    r.solution.converged ? 1 : 0, r.solution.iterations,
                    vwp::fmt(r.solution.energy).c_str());
        return r.exit_code;
    }
    if (cmd == "sweep") {
        const auto r = vwp::cmd_sweep(cfg, out_dir, force, jobs);
        std::printf("sweep: %zu records", r.records.size());
        if (r.fits_valid)
            std::printf(", diameter exponent = %s", vwp::fmt(r.fit.exponent).c_str());
        std::printf("\n");
        return r.exit_code;
    }
    if (cmd == "simulate") {
        const auto r = vwp::cmd_simulate(cfg, seed_from, out_dir, force);
        std::printf("simulate: t_end = %s dt = %s restarts = %d\n",
                    vwp::fmt(r.report.t_end).c_str(), vwp::fmt(r.report.dt).c_str(),
                    r.report.restarts);
        return r.exit_code;
    }
    print_error("usage", "unknown command");
    return vwp::kExitValidation;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"steady vortex-wave patch laboratory on the unit disk"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", seed_from, bundle;
    bool force = false;
    int jobs = 1;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        if (needs_config)
            sub->add_option("--config", config_path, "run configuration file")->required();
        sub->add_option("--out", out_dir, "output bundle directory");
        sub->add_flag("--force", force, "overwrite a non-empty output directory");
        sub->add_option("--jobs", jobs, "parallel lambda runs (sweep; disables warm starts)");
    };
    add_common(app.add_subcommand("kr-min", "locate a Kirchhoff-Routh local minimum"), true);
    add_common(app.add_subcommand("solve", "solve the patch problem at one lambda"), true);
    add_common(app.add_subcommand("sweep", "solve across a lambda ladder and run the checks"),
               true);
    auto* sim = app.add_subcommand("simulate", "integrate the vortex-wave dynamics");
    add_common(sim, true);
    sim->add_option("--seed-from", seed_from, "solve bundle to simulate");
    auto* val = app.add_subcommand("validate", "re-verify a stored bundle");
    val->add_option("bundle", bundle, "bundle directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        return dispatch(app.get_subcommands().front()->get_name(), config_path, out_dir, force,
                        jobs, seed_from, bundle);
    } catch (const vwp::ValidationError& e) {
        print_error("validation", e.what());
        return vwp::kExitValidation;
    } catch (const vwp::ConvergenceError& e) {
        print_error("non-convergence", e.what());
        return vwp::kExitNonConvergence;
    } catch (const vwp::NumericalError& e) {
        print_error("numerical", e.what());
        return vwp::kExitNumerical;
    } catch (const std::exception& e) {
        print_error("internal", e.what());
        return vwp::kExitNumerical;
    }
}
