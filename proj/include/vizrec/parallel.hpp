#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace vizrec {

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Callers write results
/// into pre-sized slots so output order never depends on scheduling. The first
/// exception thrown by any task is rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
    const std::size_t threads = std::min<std::size_t>(std::max(1u, workers), n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = n;
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(threads - 1);
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(run);
    run();
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace vizrec
