#pragma once

#include <algorithm>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace kmoco {

// Run fn(i) for i in [0, n) across up to `threads` workers. Work is assigned
// by index striding, so any per-index outputs land in caller-owned slots and
// the overall result is independent of scheduling. The first exception thrown
// by any worker is rethrown on the calling thread.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mtx;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (int i = t; i < n; i += threads) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mtx);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (std::thread& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

inline int hardware_threads() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

} // namespace kmoco
