// Benchmark of the data-parallel kernels against their serial reference:
// multistart cycle solving, branch annotation, and batch simulation.
#include <chrono>
#include <cstdio>
#include <vector>

#include "vih/parallel.hpp"
#include "vih/solver.hpp"
#include "vih/sweep.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

template <typename Fn>
double time_best_of(int reps, const Fn& fn) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = Clock::now();
        fn();
        best = std::min(best, ms_since(t0));
    }
    return best;
}

void report(const char* name, double serial_ms, double par_ms, int jobs) {
    std::printf("%-22s serial %9.2f ms   %2d jobs %9.2f ms   speedup %.2fx\n", name, serial_ms,
                jobs, par_ms, serial_ms / par_ms);
}

}  // namespace

int main() {
    const int jobs = vih::par::resolve_jobs(0);
    const vih::model::SystemParams p{0.5, 0.16, 0.1245 * 9.8 * 0.5 / 5.0, 0.0};
    const auto fo = vih::model::cosine_forcing();

    // 1. multistart solving over the 72-seed grid
    {
        const auto serial =
            time_best_of(3, [&] { (void)vih::solver::solve_2to1_multistart(p, fo, 1); });
        const auto par =
            time_best_of(3, [&] { (void)vih::solver::solve_2to1_multistart(p, fo, jobs); });
        report("multistart solve", serial, par, jobs);
    }

    // 2. branch annotation: stability + energy on a 60-point branch
    {
        auto branch = vih::sweep::continue_branch(
            vih::sweep::OrbitType::TwoToOne, 0.16, 0.20, (0.20 - 0.16) / 59, p, fo,
            {0.446, 5.983, 0.209, 0.461});
        const vih::energy::VoltageModel vm;
        auto b1 = branch;
        const auto serial = time_best_of(3, [&] { vih::sweep::annotate_branch(b1, p, fo, vm, 1); });
        auto b2 = branch;
        const auto par = time_best_of(3, [&] { vih::sweep::annotate_branch(b2, p, fo, vm, jobs); });
        report("branch annotation", serial, par, jobs);
    }

    // 3. batch simulation: 64 runs of 120 time units each
    {
        std::vector<vih::par::SimJob> batch;
        for (int i = 0; i < 64; ++i) {
            vih::par::SimJob jb;
            jb.params = p;
            jb.params.d = 0.14 + 0.001 * i;
            jb.init = {0.0, 0.3, 0.0};
            jb.t_transient = 80.0;
            jb.t_window = 40.0;
            batch.push_back(jb);
        }
        const auto serial = time_best_of(3, [&] { (void)vih::par::batch_simulate(batch, fo, 1); });
        const auto par = time_best_of(3, [&] { (void)vih::par::batch_simulate(batch, fo, jobs); });
        report("batch simulation", serial, par, jobs);
    }
    return 0;
}
