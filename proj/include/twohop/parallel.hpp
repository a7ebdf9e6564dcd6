#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace twohop {

// Worker count: TWOHOP_WORKERS if set to a positive integer, else hardware
// concurrency.
unsigned worker_count();

// Runs body(i) for i in [0, n) on up to worker_count() threads. Results must
// go to per-index slots so the outcome does not depend on scheduling. The
// first exception thrown by any body is rethrown after all workers stop.
template <class Body>
void parallel_for(std::uint64_t n, Body body) {
    const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(worker_count(), n));
    if (workers <= 1) {
        for (std::uint64_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::uint64_t i = next++; i < n && !failed; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed = true;
                }
            }
        });
    }
    pool.clear();
    if (error) std::rethrow_exception(error);
}

}  // namespace twohop
