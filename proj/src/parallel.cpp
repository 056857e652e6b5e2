#include "vih/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vih::par {

int resolve_jobs(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("IMPACT_HARVEST_JOBS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (const std::exception&) {
            // fall through to hardware detection on a malformed value
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body) {
    if (n == 0) return;
    if (jobs <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::exception_ptr first_error = nullptr;
    std::atomic<bool> failed{false};
    auto guarded = [&](std::size_t i) {
        if (failed.load(std::memory_order_relaxed)) return;
        try {
            body(i);
        } catch (...) {
            if (!failed.exchange(true)) first_error = std::current_exception();
        }
    };
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
        guarded(static_cast<std::size_t>(i));
#else
    const std::size_t workers = std::min<std::size_t>(jobs, n);
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) guarded(i);
        });
    for (auto& t : pool) t.join();
#endif
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<sim::ImpactSequence> batch_simulate(const std::vector<SimJob>& jobs_in,
                                                const model::Forcing& fo, int jobs) {
    std::vector<sim::ImpactSequence> out(jobs_in.size());
    parallel_for(jobs_in.size(), jobs, [&](std::size_t i) {
        const auto& jb = jobs_in[i];
        out[i] = sim::simulate(jb.params, fo, jb.init, jb.t_transient, jb.t_window);
    });
    return out;
}

}  // namespace vih::par
