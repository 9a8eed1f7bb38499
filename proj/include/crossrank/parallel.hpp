#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace crossrank {

namespace detail {

inline std::atomic<std::size_t>& thread_cap_storage() {
    static std::atomic<std::size_t> cap{0}; // 0 = not set programmatically
    return cap;
}

inline std::size_t env_thread_cap() {
    static const std::size_t cached = [] {
        if (const char* v = std::getenv("CROSSRANK_THREADS")) {
            const long n = std::strtol(v, nullptr, 10);
            if (n > 0) return static_cast<std::size_t>(n);
        }
        return std::size_t{0};
    }();
    return cached;
}

} // namespace detail

/// Programmatic override of the worker-thread cap (0 restores the default,
/// which is hardware concurrency optionally capped by CROSSRANK_THREADS).
inline void set_thread_cap(std::size_t cap) {
    detail::thread_cap_storage().store(cap, std::memory_order_relaxed);
}

inline std::size_t max_threads() {
    if (const std::size_t cap = detail::thread_cap_storage().load(std::memory_order_relaxed); cap > 0) {
        return cap;
    }
    std::size_t hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const std::size_t env = detail::env_thread_cap(); env > 0 && env < hw) {
        return env;
    }
    return hw;
}

/// Runs fn(i) for i in [0, n). Rows are partitioned statically across threads;
/// each index is processed exactly once by one thread, so results do not
/// depend on the degree of parallelism.
template <typename F>
void parallel_rows(std::size_t n, F&& fn) {
    const std::size_t threads = std::min(max_threads(), n);
    if (threads <= 1 || n < 64) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads - 1);
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t t = 1; t < threads; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (std::size_t i = 0; i < std::min(chunk, n); ++i) fn(i);
    for (auto& th : pool) th.join();
}

} // namespace crossrank
