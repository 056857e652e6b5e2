#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vih/model.hpp"

namespace vih::cli {

/// Rejected configuration; the driver maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerical failure with diagnostics; the driver maps this to exit code 3.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Scenario { Simulate, Solve, Sweep, Graze, Energy, Reproduce };
enum class OutFormat { Csv, Json };

struct SweepSpec {
    double from = 0.0, to = 0.0, step = 1e-3;
    std::string direction = "down";
};

struct SimSpec {
    double Z0 = 0.0, v0 = 0.3, t0 = 0.0;
    double t_transient = 400.0, t_window = 80.0;
    int k_max = 16;
};

struct EnergySpec {
    std::string model = "power";
    double c = 1.0, gamma = 2.0, U_in = 0.0;
    std::vector<std::pair<double, double>> table;
};

struct RunConfig {
    Scenario scenario = Scenario::Simulate;
    std::string recipe;

    model::SystemParams params;
    std::optional<model::PhysicalParams> physical;
    bool dimensionless_given = false;  ///< d/gbar given directly; wins over physical

    std::string orbit_type = "2:1";
    std::vector<double> guess;
    bool seed_grid = false;

    SweepSpec sweep;
    SimSpec sim;
    EnergySpec energy;

    std::string out = ".";
    OutFormat format = OutFormat::Csv;
    bool svg = false;
    int jobs = 0;
};

/// Parses and validates a JSON config document. Throws ConfigError.
[[nodiscard]] RunConfig parse_config(const std::string& json_text);
[[nodiscard]] RunConfig load_config(const std::string& path);

/// Canonical JSON echo; parse_config(dump_config(c)) reproduces c.
[[nodiscard]] std::string dump_config(const RunConfig& c);

/// Effective dimensionless parameters after precedence resolution.
[[nodiscard]] model::SystemParams effective_params(const RunConfig& c);

}  // namespace vih::cli
