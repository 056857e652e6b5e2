#pragma once

#include <string>
#include <vector>

#include "vih/config.hpp"

namespace vih::cli {

/// Named reproduction recipes with pinned parameters. Each writes CSV (and
/// optional SVG) artifacts under `out`.
[[nodiscard]] std::vector<std::string> recipe_names();

/// Executes one scenario; returns the artifact paths written. Throws
/// ConfigError / NumericalError for the driver to map to exit codes.
std::vector<std::string> run(const RunConfig& config);

}  // namespace vih::cli
