// Command-line driver for the inclined vibro-impact harvester toolkit.
//
// Scenarios: simulate (event-driven run + pattern label), solve (periodic
// cycles from a guess or a seed grid), sweep (branch continuation with
// stability and critical points), graze (hysteresis scan of a pattern
// transition), energy (bistability energy map), reproduce (pinned recipes).
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vih/config.hpp"
#include "vih/recipes.hpp"

namespace {

using vih::cli::OutFormat;
using vih::cli::RunConfig;
using vih::cli::Scenario;

struct CliState {
    RunConfig config;
    std::string config_path;
    bool dump_only = false;
};

void add_common(CLI::App* cmd, CliState& st) {
    cmd->add_option("--config", st.config_path, "JSON config file; flags override its fields");
    cmd->add_option_function<std::string>(
           "--out", [&st](const std::string& v) { st.config.out = v; },
           "output directory (default .)");
    cmd->add_option_function<std::string>(
           "--format",
           [&st](const std::string& v) {
               if (v == "csv")
                   st.config.format = OutFormat::Csv;
               else if (v == "json")
                   st.config.format = OutFormat::Json;
               else
                   throw CLI::ValidationError("--format must be csv or json");
           },
           "artifact format: csv or json");
    cmd->add_flag_function(
        "--svg", [&st](std::int64_t) { st.config.svg = true; }, "also render SVG charts");
    cmd->add_option_function<int>(
        "--jobs", [&st](int v) { st.config.jobs = v; },
        "worker threads (0 = IMPACT_HARVEST_JOBS or hardware)");
    cmd->add_flag_function(
        "--dump-config", [&st](std::int64_t) { st.dump_only = true; },
        "print the effective config as canonical JSON and exit");
}

void add_params(CLI::App* cmd, CliState& st) {
    auto mark = [&st](double) { st.config.dimensionless_given = true; };
    cmd->add_option_function<double>(
           "--d", [&st, mark](double v) { st.config.params.d = v; mark(v); },
           "dimensionless cylinder length");
    cmd->add_option_function<double>(
           "--gbar", [&st, mark](double v) { st.config.params.gbar = v; mark(v); },
           "dimensionless gravity forcing");
    cmd->add_option_function<double>(
        "--r", [&st](double v) { st.config.params.r = v; }, "restitution coefficient");
    cmd->add_option_function<double>(
        "--phi", [&st](double v) { st.config.params.phi = v; }, "global forcing phase");
}

void add_orbit(CLI::App* cmd, CliState& st) {
    cmd->add_option_function<std::string>(
           "--orbit",
           [&st](const std::string& v) {
               if (v != "1:1" && v != "2:1")
                   throw CLI::ValidationError("--orbit must be 1:1 or 2:1");
               st.config.orbit_type = v;
           },
           "cycle family: 2:1 or 1:1");
    cmd->add_option_function<std::vector<double>>(
           "--guess", [&st](const std::vector<double>& v) { st.config.guess = v; },
           "initial guess (2:1: v phi q p; 1:1: v phi dt)")
        ->expected(-1);
    cmd->add_flag_function(
        "--seed-grid", [&st](std::int64_t) { st.config.seed_grid = true; },
        "multistart from the built-in seed grid");
}

void add_range(CLI::App* cmd, CliState& st) {
    cmd->add_option_function<double>(
        "--from", [&st](double v) { st.config.sweep.from = v; }, "range start in d");
    cmd->add_option_function<double>(
        "--to", [&st](double v) { st.config.sweep.to = v; }, "range end in d");
    cmd->add_option_function<double>(
        "--step", [&st](double v) { st.config.sweep.step = v; }, "d step");
    cmd->add_option_function<std::string>(
           "--direction",
           [&st](const std::string& v) {
               if (v != "down" && v != "up")
                   throw CLI::ValidationError("--direction must be down or up");
               st.config.sweep.direction = v;
           },
           "scan direction: down or up");
}

void add_sim(CLI::App* cmd, CliState& st) {
    cmd->add_option_function<double>(
        "--Z0", [&st](double v) { st.config.sim.Z0 = v; }, "initial relative position");
    cmd->add_option_function<double>(
        "--v0", [&st](double v) { st.config.sim.v0 = v; }, "initial velocity");
    cmd->add_option_function<double>(
        "--t0", [&st](double v) { st.config.sim.t0 = v; }, "start time");
    cmd->add_option_function<double>(
        "--transient", [&st](double v) { st.config.sim.t_transient = v; },
        "transient time before recording");
    cmd->add_option_function<double>(
        "--window", [&st](double v) { st.config.sim.t_window = v; }, "recording window length");
    cmd->add_option_function<int>(
        "--k-max", [&st](int v) { st.config.sim.k_max = v; }, "largest repeat period searched");
}

void add_energy(CLI::App* cmd, CliState& st) {
    cmd->add_option_function<std::string>(
        "--model", [&st](const std::string& v) { st.config.energy.model = v; },
        "voltage model: power or table");
    cmd->add_option_function<double>(
        "--coef", [&st](double v) { st.config.energy.c = v; }, "voltage coefficient c");
    cmd->add_option_function<double>(
        "--gamma", [&st](double v) { st.config.energy.gamma = v; }, "voltage exponent");
    cmd->add_option_function<double>(
        "--u-in", [&st](double v) { st.config.energy.U_in = v; }, "input voltage (reporting)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"inclined vibro-impact energy harvester toolkit"};
    app.require_subcommand(0, 1);

    CliState st;
    std::string recipe;
    bool list_recipes = false;

    auto* c_sim = app.add_subcommand("simulate", "event-driven run and pattern label");
    auto* c_solve = app.add_subcommand("solve", "periodic 2:1 / 1:1 cycle roots");
    auto* c_sweep = app.add_subcommand("sweep", "branch continuation over d");
    auto* c_graze = app.add_subcommand("graze", "hysteresis scan of a pattern transition");
    auto* c_energy = app.add_subcommand("energy", "bistability energy map over d");
    auto* c_repro = app.add_subcommand("reproduce", "run a pinned recipe");

    for (auto* cmd : {c_sim, c_solve, c_sweep, c_graze, c_energy, c_repro}) add_common(cmd, st);
    for (auto* cmd : {c_sim, c_solve, c_sweep, c_graze, c_energy}) add_params(cmd, st);
    add_sim(c_sim, st);
    c_sim->add_flag_function(
        "--no-svg", [&st](std::int64_t) { st.config.svg = false; }, "suppress SVG output");
    add_orbit(c_solve, st);
    add_orbit(c_sweep, st);
    add_range(c_sweep, st);
    add_energy(c_sweep, st);
    add_range(c_graze, st);
    add_range(c_energy, st);
    add_energy(c_energy, st);
    c_repro->add_option("recipe", recipe, "recipe name, or 'all'");
    c_repro->add_flag("--list", list_recipes, "list available recipes");

    // The config file must be applied before flag overrides, so parse twice:
    // once to learn --config, then again onto the loaded config.
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (!st.config_path.empty()) {
            st.config = vih::cli::load_config(st.config_path);
            CLI::App reparse{"reparse"};
            reparse.require_subcommand(0, 1);
            CliState st2;
            st2.config = st.config;
            auto* r_sim = reparse.add_subcommand("simulate", "");
            auto* r_solve = reparse.add_subcommand("solve", "");
            auto* r_sweep = reparse.add_subcommand("sweep", "");
            auto* r_graze = reparse.add_subcommand("graze", "");
            auto* r_energy = reparse.add_subcommand("energy", "");
            auto* r_repro = reparse.add_subcommand("reproduce", "");
            for (auto* cmd : {r_sim, r_solve, r_sweep, r_graze, r_energy, r_repro})
                add_common(cmd, st2);
            for (auto* cmd : {r_sim, r_solve, r_sweep, r_graze, r_energy}) add_params(cmd, st2);
            add_sim(r_sim, st2);
            r_sim->add_flag_function(
                "--no-svg", [&st2](std::int64_t) { st2.config.svg = false; }, "");
            add_orbit(r_solve, st2);
            add_orbit(r_sweep, st2);
            add_range(r_sweep, st2);
            add_energy(r_sweep, st2);
            add_range(r_graze, st2);
            add_range(r_energy, st2);
            add_energy(r_energy, st2);
            r_repro->add_option("recipe", recipe, "");
            r_repro->add_flag("--list", list_recipes, "");
            reparse.parse(argc, argv);
            st2.dump_only = st.dump_only;
            st = std::move(st2);
        }

        if (c_sim->parsed()) st.config.scenario = Scenario::Simulate;
        if (c_solve->parsed()) st.config.scenario = Scenario::Solve;
        if (c_sweep->parsed()) st.config.scenario = Scenario::Sweep;
        if (c_graze->parsed()) st.config.scenario = Scenario::Graze;
        if (c_energy->parsed()) st.config.scenario = Scenario::Energy;
        if (c_repro->parsed()) {
            st.config.scenario = Scenario::Reproduce;
            if (list_recipes) {
                for (const auto& n : vih::cli::recipe_names()) std::puts(n.c_str());
                return 0;
            }
            if (!recipe.empty()) st.config.recipe = recipe;
        }

        if (st.dump_only) {
            std::puts(vih::cli::dump_config(st.config).c_str());
            return 0;
        }

        const auto artifacts = vih::cli::run(st.config);
        for (const auto& path : artifacts) std::puts(path.c_str());
        return 0;
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "argument error: %s\n", e.what());
        return 2;
    } catch (const vih::cli::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const vih::cli::NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    }
}
