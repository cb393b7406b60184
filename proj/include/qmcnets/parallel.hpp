#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace qmcnets {

/// Worker count: explicit request, else WAFOM_NETS_JOBS, else hardware.
inline unsigned resolve_jobs(unsigned requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("WAFOM_NETS_JOBS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

/// Runs f(i) for i in [0, n). Work items must not share mutable state; the
/// result of the whole loop must not depend on scheduling.
template <class F>
void parallel_for(std::size_t n, unsigned jobs, F&& f) {
    jobs = resolve_jobs(jobs);
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    unsigned workers = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n || failed.load()) return;
                try {
                    f(i);
                } catch (...) {
                    if (!failed.exchange(true)) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

}  // namespace qmcnets
