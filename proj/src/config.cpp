#include "vih/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace vih::cli {

namespace {

using nlohmann::json;

Scenario scenario_from(const std::string& s) {
    if (s == "simulate") return Scenario::Simulate;
    if (s == "solve") return Scenario::Solve;
    if (s == "sweep") return Scenario::Sweep;
    if (s == "graze") return Scenario::Graze;
    if (s == "energy") return Scenario::Energy;
    if (s == "reproduce") return Scenario::Reproduce;
    throw ConfigError("unknown scenario: " + s);
}

const char* scenario_name(Scenario s) {
    switch (s) {
        case Scenario::Simulate: return "simulate";
        case Scenario::Solve: return "solve";
        case Scenario::Sweep: return "sweep";
        case Scenario::Graze: return "graze";
        case Scenario::Energy: return "energy";
        case Scenario::Reproduce: return "reproduce";
    }
    return "simulate";
}

double num(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw ConfigError(std::string("field must be a number: ") + key);
    return j[key].get<double>();
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be an object");

    RunConfig c;
    try {
        if (j.contains("scenario")) c.scenario = scenario_from(j["scenario"].get<std::string>());
        if (j.contains("recipe")) c.recipe = j["recipe"].get<std::string>();

        if (j.contains("params")) {
            const auto& p = j["params"];
            if (!p.is_object()) throw ConfigError("params must be an object");
            c.params.r = num(p, "r", c.params.r);
            c.params.d = num(p, "d", c.params.d);
            c.params.gbar = num(p, "gbar", c.params.gbar);
            c.params.phi = num(p, "phi", c.params.phi);
            c.dimensionless_given = true;
        }
        if (j.contains("physical")) {
            const auto& p = j["physical"];
            if (!p.is_object()) throw ConfigError("physical must be an object");
            model::PhysicalParams ph;
            ph.M = num(p, "M", ph.M);
            ph.s = num(p, "s", ph.s);
            ph.omega = num(p, "omega", ph.omega);
            ph.F_norm = num(p, "F_norm", ph.F_norm);
            ph.beta = num(p, "beta", ph.beta);
            ph.g = num(p, "g", ph.g);
            c.physical = ph;
        }

        if (j.contains("orbit")) {
            c.orbit_type = j["orbit"].get<std::string>();
            if (c.orbit_type != "1:1" && c.orbit_type != "2:1")
                throw ConfigError("orbit must be \"1:1\" or \"2:1\"");
        }
        if (j.contains("guess")) {
            if (!j["guess"].is_array()) throw ConfigError("guess must be an array of numbers");
            c.guess = j["guess"].get<std::vector<double>>();
        }
        if (j.contains("seed_grid")) c.seed_grid = j["seed_grid"].get<bool>();

        if (j.contains("sweep")) {
            const auto& s = j["sweep"];
            c.sweep.from = num(s, "from", c.sweep.from);
            c.sweep.to = num(s, "to", c.sweep.to);
            c.sweep.step = num(s, "step", c.sweep.step);
            if (s.contains("direction")) {
                c.sweep.direction = s["direction"].get<std::string>();
                if (c.sweep.direction != "down" && c.sweep.direction != "up")
                    throw ConfigError("sweep.direction must be \"down\" or \"up\"");
            }
        }
        if (j.contains("sim")) {
            const auto& s = j["sim"];
            c.sim.Z0 = num(s, "Z0", c.sim.Z0);
            c.sim.v0 = num(s, "v0", c.sim.v0);
            c.sim.t0 = num(s, "t0", c.sim.t0);
            c.sim.t_transient = num(s, "t_transient", c.sim.t_transient);
            c.sim.t_window = num(s, "t_window", c.sim.t_window);
            c.sim.k_max = static_cast<int>(num(s, "k_max", c.sim.k_max));
            if (c.sim.k_max < 1) throw ConfigError("sim.k_max must be >= 1");
            if (c.sim.t_window <= 0) throw ConfigError("sim.t_window must be positive");
        }
        if (j.contains("energy")) {
            const auto& e = j["energy"];
            if (e.contains("model")) {
                c.energy.model = e["model"].get<std::string>();
                if (c.energy.model != "power" && c.energy.model != "table")
                    throw ConfigError("energy.model must be \"power\" or \"table\"");
            }
            c.energy.c = num(e, "c", c.energy.c);
            c.energy.gamma = num(e, "gamma", c.energy.gamma);
            c.energy.U_in = num(e, "U_in", c.energy.U_in);
            if (e.contains("table")) {
                for (const auto& knot : e["table"]) {
                    if (!knot.is_array() || knot.size() != 2)
                        throw ConfigError("energy.table entries must be [speed, voltage] pairs");
                    c.energy.table.emplace_back(knot[0].get<double>(), knot[1].get<double>());
                }
            }
            if (c.energy.c <= 0) throw ConfigError("energy.c must be positive");
            if (c.energy.gamma <= 0) throw ConfigError("energy.gamma must be positive");
        }

        if (j.contains("out")) c.out = j["out"].get<std::string>();
        if (j.contains("format")) {
            const auto f = j["format"].get<std::string>();
            if (f == "csv")
                c.format = OutFormat::Csv;
            else if (f == "json")
                c.format = OutFormat::Json;
            else
                throw ConfigError("format must be \"csv\" or \"json\"");
        }
        if (j.contains("svg")) c.svg = j["svg"].get<bool>();
        if (j.contains("jobs")) {
            c.jobs = j["jobs"].get<int>();
            if (c.jobs < 0) throw ConfigError("jobs must be >= 0");
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return parse_config(os.str());
}

std::string dump_config(const RunConfig& c) {
    json j;
    j["scenario"] = scenario_name(c.scenario);
    if (!c.recipe.empty()) j["recipe"] = c.recipe;
    if (c.dimensionless_given)
        j["params"] = {{"r", c.params.r},
                       {"d", c.params.d},
                       {"gbar", c.params.gbar},
                       {"phi", c.params.phi}};
    if (c.physical)
        j["physical"] = {{"M", c.physical->M},     {"s", c.physical->s},
                         {"omega", c.physical->omega}, {"F_norm", c.physical->F_norm},
                         {"beta", c.physical->beta},   {"g", c.physical->g}};
    j["orbit"] = c.orbit_type;
    if (!c.guess.empty()) j["guess"] = c.guess;
    if (c.seed_grid) j["seed_grid"] = true;
    j["sweep"] = {{"from", c.sweep.from},
                  {"to", c.sweep.to},
                  {"step", c.sweep.step},
                  {"direction", c.sweep.direction}};
    j["sim"] = {{"Z0", c.sim.Z0},
                {"v0", c.sim.v0},
                {"t0", c.sim.t0},
                {"t_transient", c.sim.t_transient},
                {"t_window", c.sim.t_window},
                {"k_max", c.sim.k_max}};
    json je = {{"model", c.energy.model},
               {"c", c.energy.c},
               {"gamma", c.energy.gamma},
               {"U_in", c.energy.U_in}};
    if (!c.energy.table.empty()) {
        json t = json::array();
        for (const auto& [x, y] : c.energy.table) t.push_back({x, y});
        je["table"] = t;
    }
    j["energy"] = je;
    j["out"] = c.out;
    j["format"] = c.format == OutFormat::Csv ? "csv" : "json";
    j["svg"] = c.svg;
    j["jobs"] = c.jobs;
    return j.dump(2);
}

model::SystemParams effective_params(const RunConfig& c) {
    model::SystemParams p = c.params;
    if (!c.dimensionless_given && c.physical) {
        try {
            p = model::nondimensionalize(*c.physical, c.params.r, c.params.phi);
        } catch (const std::domain_error& e) {
            throw ConfigError(e.what());
        }
    }
    try {
        model::validate(p);
    } catch (const std::domain_error& e) {
        throw ConfigError(e.what());
    }
    return p;
}

}  // namespace vih::cli
