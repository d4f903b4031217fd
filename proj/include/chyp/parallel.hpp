#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace chyp {

/// Number of workers used by the sweep helpers. 0 means hardware concurrency.
inline std::size_t& worker_count() {
    static std::size_t workers = 0;
    return workers;
}

/// Runs fn(i) for i in [0, n) on a fixed pool of threads. Each index must write
/// only to its own output slot; results are then independent of scheduling.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    std::size_t workers = worker_count();
    if (workers == 0) workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace chyp
