#include "marle/config.hpp"

#include "marle/error.hpp"

#include <fstream>
#include <set>

namespace marle {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) throw ConfigError(where + it.key(), "unknown key");
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + key, "wrong type");
    }
}

void require_object(const json& j, const std::string& name) {
    if (!j.is_object()) throw ConfigError(name, "must be a JSON object");
}

} // namespace

json to_json(const GridSpec& g) {
    return json{{"D", g.D},
                {"p_max", g.p_max},
                {"n_p", g.n_p},
                {"I_max", g.I_max},
                {"n_I", g.n_I},
                {"n_x", g.n_x},
                {"L_x", g.L_x},
                {"gamma0", g.gamma0},
                {"tau", g.tau},
                {"momentum_rule", to_string(g.momentum_rule)},
                {"internal_rule", to_string(g.internal_rule)},
                {"tail_tol", g.tail_tol},
                {"floor_tol", g.floor_tol}};
}

GridSpec grid_from_json(const json& j, GridSpec g) {
    require_object(j, "grid");
    reject_unknown(j,
                   {"D", "p_max", "n_p", "I_max", "n_I", "n_x", "L_x", "gamma0", "tau", "momentum_rule",
                    "internal_rule", "tail_tol", "floor_tol"},
                   "grid.");
    const std::string w = "grid.";
    read(j, "D", g.D, w);
    read(j, "p_max", g.p_max, w);
    read(j, "n_p", g.n_p, w);
    read(j, "I_max", g.I_max, w);
    read(j, "n_I", g.n_I, w);
    read(j, "n_x", g.n_x, w);
    read(j, "L_x", g.L_x, w);
    read(j, "gamma0", g.gamma0, w);
    read(j, "tau", g.tau, w);
    read(j, "tail_tol", g.tail_tol, w);
    read(j, "floor_tol", g.floor_tol, w);
    std::string s;
    if (j.contains("momentum_rule")) {
        read(j, "momentum_rule", s, w);
        g.momentum_rule = momentum_rule_from_string(s);
    }
    if (j.contains("internal_rule")) {
        read(j, "internal_rule", s, w);
        g.internal_rule = internal_rule_from_string(s);
    }
    return g;
}

json to_json(const RunConfig& c) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["grid"] = to_json(c.grid);
    j["run"] = json{{"t_end", c.t_end},
                    {"dt", c.dt},
                    {"scheme", to_string(c.scheme)},
                    {"duhamel_iterations", c.duhamel_iterations},
                    {"duhamel_window", c.duhamel_window},
                    {"collision_mode", to_string(c.collision.kind)},
                    {"picard_iters", c.collision.picard_iters},
                    {"energy_order", c.energy_order},
                    {"output_every", c.output_every},
                    {"fit_start_fraction", c.fit_start_fraction}};
    j["initial"] = json{{"epsilon", c.initial.epsilon}, {"mode", c.initial.mode}, {"shape", c.initial.shape}};
    j["monitors"] = json{{"positivity_floor", c.monitors.positivity_floor},
                         {"totals_tol", c.monitors.totals_tol},
                         {"energy_increase_tol", c.monitors.energy_increase_tol},
                         {"blowup_factor", c.monitors.blowup_factor},
                         {"defect_tol", c.monitors.defect_tol},
                         {"entropy_slack", c.monitors.entropy_slack}};
    j["seed"] = c.seed;
    return j;
}

RunConfig config_from_json(const json& j) {
    require_object(j, "config");
    reject_unknown(j, {"schema_version", "preset", "grid", "run", "initial", "monitors", "seed"}, "");
    if (!j.contains("schema_version")) throw ConfigError("schema_version", "missing");
    int ver = 0;
    read(j, "schema_version", ver, "");
    if (ver != kSchemaVersion)
        throw ConfigError("schema_version", "unsupported version " + std::to_string(ver) + " (expected " +
                                                std::to_string(kSchemaVersion) + ")");
    RunConfig c;
    if (j.contains("preset")) {
        std::string name;
        read(j, "preset", name, "");
        c = preset(name);
    }
    if (j.contains("grid")) c.grid = grid_from_json(j.at("grid"), c.grid);
    if (j.contains("run")) {
        const json& r = j.at("run");
        require_object(r, "run");
        reject_unknown(r,
                       {"t_end", "dt", "scheme", "duhamel_iterations", "duhamel_window", "collision_mode",
                        "picard_iters", "energy_order", "output_every", "fit_start_fraction"},
                       "run.");
        const std::string w = "run.";
        read(r, "t_end", c.t_end, w);
        read(r, "dt", c.dt, w);
        read(r, "duhamel_iterations", c.duhamel_iterations, w);
        read(r, "duhamel_window", c.duhamel_window, w);
        read(r, "picard_iters", c.collision.picard_iters, w);
        read(r, "energy_order", c.energy_order, w);
        read(r, "output_every", c.output_every, w);
        read(r, "fit_start_fraction", c.fit_start_fraction, w);
        std::string s;
        if (r.contains("scheme")) {
            read(r, "scheme", s, w);
            c.scheme = scheme_from_string(s);
        }
        if (r.contains("collision_mode")) {
            read(r, "collision_mode", s, w);
            c.collision.kind = relaxation_kind_from_string(s);
        }
    }
    if (j.contains("initial")) {
        const json& r = j.at("initial");
        require_object(r, "initial");
        reject_unknown(r, {"epsilon", "mode", "shape"}, "initial.");
        read(r, "epsilon", c.initial.epsilon, "initial.");
        read(r, "mode", c.initial.mode, "initial.");
        read(r, "shape", c.initial.shape, "initial.");
    }
    if (j.contains("monitors")) {
        const json& r = j.at("monitors");
        require_object(r, "monitors");
        reject_unknown(r, {"positivity_floor", "totals_tol", "energy_increase_tol", "blowup_factor", "defect_tol",
                          "entropy_slack"},
                       "monitors.");
        const std::string w = "monitors.";
        read(r, "positivity_floor", c.monitors.positivity_floor, w);
        read(r, "totals_tol", c.monitors.totals_tol, w);
        read(r, "energy_increase_tol", c.monitors.energy_increase_tol, w);
        read(r, "blowup_factor", c.monitors.blowup_factor, w);
        read(r, "defect_tol", c.monitors.defect_tol, w);
        read(r, "entropy_slack", c.monitors.entropy_slack, w);
    }
    read(j, "seed", c.seed, "");
    c.validate();
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config", "cannot open '" + path + "'");
    json j;
    try {
        is >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
    return config_from_json(j);
}

std::vector<std::string> preset_names() { return {"analysis", "relax0d", "decay1d"}; }

RunConfig preset(const std::string& name) {
    RunConfig c;
    if (name == "analysis") {
        // operator analysis grid: accuracy of M, Mtilde ~1e-8 at D=2, gamma0=1
        c.grid = GridSpec{};
        c.t_end = 0.0;
        c.dt = 0.1;
        return c;
    }
    GridSpec small;
    small.n_p = 12;
    small.p_max = 14.0;
    small.n_I = 8;
    small.I_max = 14.0;
    small.n_x = 32;
    if (name == "relax0d") {
        c.grid = small;
        c.grid.n_x = 4;
        c.t_end = 5.0;
        c.dt = 0.1;
        c.initial.epsilon = 0.1;
        return c;
    }
    if (name == "decay1d") {
        c.grid = small;
        c.t_end = 20.0;
        c.dt = 0.1;
        c.output_every = 2;
        c.fit_start_fraction = 0.5;
        return c;
    }
    throw ConfigError("preset", "unknown preset '" + name + "'");
}

} // namespace marle
