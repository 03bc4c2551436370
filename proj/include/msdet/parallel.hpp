#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace msdet {

/// Runs fn(i) for i in [0, n) on up to `threads` workers, each owning a
/// contiguous index range. Callers write results into per-index slots, so
/// the outcome is identical for any thread count. The first exception
/// thrown by fn is rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    if (n == 0) return;
    const std::size_t workers =
        std::min<std::size_t>(n, threads < 1 ? 1 : static_cast<std::size_t>(threads));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr error;
    std::atomic_flag error_set;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                if (!error_set.test_and_set()) {
                    error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) {
        std::rethrow_exception(error);
    }
}

} // namespace msdet
