#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vwpatch/patch.hpp"
#include "vwpatch/point_vortex.hpp"
#include "vwpatch/textio.hpp"

namespace vwp {

inline constexpr int kSchemaVersion = 1;

// Flat key/value run configuration with [section] headers, '#' comments,
// exact decimal parsing. Unknown sections or keys are rejected; the
// schema_version key is mandatory.
struct RunConfig {
    int schema_version = 0;

    double domain_radius = 1.0;
    int grid_n = 0;

    std::vector<double> strengths;
    int split_p = 0;
    bool seeds_auto = false;
    std::vector<Vec2> seeds; // explicit seeds, or kr starting guesses if auto

    double kr_search_radius = 0.25;
    double kr_gradient_tol = 1e-8;
    int kr_max_iterations = 20000;
    double kr_hessian_step = 1e-4;

    double delta = 0.0;  // 0 = auto
    double delta0 = 0.0; // 0 = auto
    std::optional<double> lambda;
    std::vector<double> lambdas;
    int min_patch_cells = 8;

    double point_tol = 1e-6;
    double threshold_tol = 1e-10;
    int max_outer = 500;

    double sim_turnovers = 3.0;
    double sim_dt = 0.0; // 0 = auto
    bool sim_control = true;

    PatchProblem to_patch_problem(const std::vector<Vec2>& resolved_seeds) const {
        PatchProblem pb;
        pb.strengths = strengths;
        pb.p = split_p;
        pb.seeds = resolved_seeds;
        pb.delta = delta;
        pb.delta0 = delta0;
        pb.lambda = lambda.value_or(lambdas.empty() ? 0.0 : lambdas.front());
        pb.grid_n = grid_n;
        pb.domain_radius = domain_radius;
        pb.point_tol = point_tol;
        pb.threshold_tol = threshold_tol;
        pb.max_outer = max_outer;
        pb.min_patch_cells = min_patch_cells;
        pb.resolve_radii();
        pb.validate();
        return pb;
    }
};

namespace detail {

struct KeyValue {
    std::string section;
    std::string key;
    std::string value;
};

inline std::vector<KeyValue> parse_key_values(const std::string& text) {
    std::vector<KeyValue> out;
    std::string section;
    std::size_t pos = 0;
    int lineno = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string_view line = trim(std::string_view(text).substr(pos, eol - pos));
        ++lineno;
        pos = eol + 1;
        if (line.empty() || line.front() == '#') {
            if (pos > text.size()) break;
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ValidationError("config line " + std::to_string(lineno) + ": bad section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
        } else {
            const std::size_t eq = line.find('=');
            if (eq == std::string_view::npos)
                throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
            out.push_back({section, std::string(trim(line.substr(0, eq))),
                           std::string(trim(line.substr(eq + 1)))});
        }
        if (pos > text.size()) break;
    }
    return out;
}

} // namespace detail

inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    bool saw_version = false, saw_strengths = false, saw_p = false, saw_seeds = false,
         saw_n = false;
    for (const auto& kv : detail::parse_key_values(text)) {
        const std::string full = kv.section.empty() ? kv.key : kv.section + "." + kv.key;
        if (full == "schema_version") {
            cfg.schema_version = static_cast<int>(parse_long(kv.value));
            saw_version = true;
        } else if (full == "domain.radius") {
            cfg.domain_radius = parse_double(kv.value);
        } else if (full == "grid.n") {
            cfg.grid_n = static_cast<int>(parse_long(kv.value));
            saw_n = true;
        } else if (full == "vortices.strengths") {
            cfg.strengths = parse_double_list(kv.value);
            saw_strengths = true;
        } else if (full == "vortices.split_p") {
            cfg.split_p = static_cast<int>(parse_long(kv.value));
            saw_p = true;
        } else if (full == "vortices.seeds") {
            if (trim(kv.value) == "auto") {
                cfg.seeds_auto = true;
            } else {
                cfg.seeds = parse_point_list(kv.value);
            }
            saw_seeds = true;
        } else if (full == "vortices.kr_seeds") {
            cfg.seeds = parse_point_list(kv.value);
        } else if (full == "kr.search_radius") {
            cfg.kr_search_radius = parse_double(kv.value);
        } else if (full == "kr.gradient_tol") {
            cfg.kr_gradient_tol = parse_double(kv.value);
        } else if (full == "kr.max_iterations") {
            cfg.kr_max_iterations = static_cast<int>(parse_long(kv.value));
        } else if (full == "kr.hessian_step") {
            cfg.kr_hessian_step = parse_double(kv.value);
        } else if (full == "patch.delta") {
            if (trim(kv.value) != "auto") cfg.delta = parse_double(kv.value);
        } else if (full == "patch.delta0") {
            if (trim(kv.value) != "auto") cfg.delta0 = parse_double(kv.value);
        } else if (full == "patch.lambda") {
            cfg.lambda = parse_double(kv.value);
        } else if (full == "patch.lambdas") {
            cfg.lambdas = parse_double_list(kv.value);
        } else if (full == "patch.min_patch_cells") {
            cfg.min_patch_cells = static_cast<int>(parse_long(kv.value));
        } else if (full == "solver.point_tol") {
            cfg.point_tol = parse_double(kv.value);
        } else if (full == "solver.threshold_tol") {
            cfg.threshold_tol = parse_double(kv.value);
        } else if (full == "solver.max_outer") {
            cfg.max_outer = static_cast<int>(parse_long(kv.value));
        } else if (full == "simulate.turnovers") {
            cfg.sim_turnovers = parse_double(kv.value);
        } else if (full == "simulate.dt") {
            if (trim(kv.value) != "auto") cfg.sim_dt = parse_double(kv.value);
        } else if (full == "simulate.control") {
            cfg.sim_control = parse_long(kv.value) != 0;
        } else {
            throw ValidationError("config: unknown key '" + full + "'");
        }
    }
    if (!saw_version) throw ValidationError("config: missing required key 'schema_version'");
    if (cfg.schema_version != kSchemaVersion)
        throw ValidationError("config: unsupported schema_version");
    if (!saw_strengths) throw ValidationError("config: missing required key 'vortices.strengths'");
    if (!saw_p) throw ValidationError("config: missing required key 'vortices.split_p'");
    if (!saw_seeds) throw ValidationError("config: missing required key 'vortices.seeds'");
    if (!saw_n) throw ValidationError("config: missing required key 'grid.n'");
    if (cfg.seeds.size() != cfg.strengths.size())
        throw ValidationError("config: seeds/strengths count mismatch");
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
        for (std::size_t j = i + 1; j < cfg.seeds.size(); ++j)
            if (dist(cfg.seeds[i], cfg.seeds[j]) < kMinVortexSeparation)
                throw ValidationError("config: coincident seeds");
    return cfg;
}

inline RunConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

// canonical serialization; parse(serialize(cfg)) == cfg field-for-field
inline std::string serialize_config(const RunConfig& cfg) {
    std::string s;
    s += "schema_version = " + fmt(cfg.schema_version) + "\n\n";
    s += "[domain]\nradius = " + fmt(cfg.domain_radius) + "\n\n";
    s += "[grid]\nn = " + fmt(cfg.grid_n) + "\n\n";
    s += "[vortices]\nstrengths =";
    for (double k : cfg.strengths) s += " " + fmt(k);
    s += "\nsplit_p = " + fmt(cfg.split_p) + "\n";
    if (cfg.seeds_auto) {
        s += "seeds = auto\nkr_seeds =";
    } else {
        s += "seeds =";
    }
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
        s += (i ? " ; " : " ") + fmt(cfg.seeds[i]);
    s += "\n\n[kr]\n";
    s += "search_radius = " + fmt(cfg.kr_search_radius) + "\n";
    s += "gradient_tol = " + fmt(cfg.kr_gradient_tol) + "\n";
    s += "max_iterations = " + fmt(cfg.kr_max_iterations) + "\n";
    s += "hessian_step = " + fmt(cfg.kr_hessian_step) + "\n";
    s += "\n[patch]\n";
    s += "delta = " + (cfg.delta > 0.0 ? fmt(cfg.delta) : std::string("auto")) + "\n";
    s += "delta0 = " + (cfg.delta0 > 0.0 ? fmt(cfg.delta0) : std::string("auto")) + "\n";
    if (cfg.lambda) s += "lambda = " + fmt(*cfg.lambda) + "\n";
    if (!cfg.lambdas.empty()) {
        s += "lambdas =";
        for (double lam : cfg.lambdas) s += " " + fmt(lam);
        s += "\n";
    }
    s += "min_patch_cells = " + fmt(cfg.min_patch_cells) + "\n";
    s += "\n[solver]\n";
    s += "point_tol = " + fmt(cfg.point_tol) + "\n";
    s += "threshold_tol = " + fmt(cfg.threshold_tol) + "\n";
    s += "max_outer = " + fmt(cfg.max_outer) + "\n";
    s += "\n[simulate]\n";
    s += "turnovers = " + fmt(cfg.sim_turnovers) + "\n";
    s += "dt = " + (cfg.sim_dt > 0.0 ? fmt(cfg.sim_dt) : std::string("auto")) + "\n";
    s += "control = " + fmt(cfg.sim_control) + "\n";
    return s;
}

} // namespace vwp
