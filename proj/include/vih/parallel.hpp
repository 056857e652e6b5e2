#pragma once

#include <functional>
#include <vector>

#include "vih/simulator.hpp"

namespace vih::par {

/// Worker count resolution: explicit request > IMPACT_HARVEST_JOBS > hardware.
[[nodiscard]] int resolve_jobs(int requested = 0);

/// Index-parallel loop; jobs <= 1 runs the plain serial loop. Bodies must
/// only write state owned by their index.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body);

struct SimJob {
    model::SystemParams params;
    sim::InitState init;
    double t_transient = sim::kDefaultTransient;
    double t_window = sim::kDefaultWindow;
};

/// Batch simulation; output order matches input order for any job count.
[[nodiscard]] std::vector<sim::ImpactSequence> batch_simulate(const std::vector<SimJob>& jobs_in,
                                                              const model::Forcing& fo, int jobs);

}  // namespace vih::par
