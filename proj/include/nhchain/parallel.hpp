#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace nhchain {

inline int resolve_thread_count(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Index-parallel map. Each worker owns a contiguous index range and writes
// results by index, so the output is identical for any thread count.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    int nt = resolve_thread_count(threads);
    if (nt <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    nt = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(nt), n));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nt));
    std::exception_ptr first_error;
    std::mutex err_mutex;
    for (int t = 0; t < nt; ++t) {
        std::size_t lo = n * static_cast<std::size_t>(t) / static_cast<std::size_t>(nt);
        std::size_t hi = n * static_cast<std::size_t>(t + 1) / static_cast<std::size_t>(nt);
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace nhchain
