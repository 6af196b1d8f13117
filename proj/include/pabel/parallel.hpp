#pragma once

// Deterministic replication-parallel map: worker threads pull indices from a
// shared counter and write into caller-owned slots, so results never depend
// on scheduling. Any worker exception is rethrown on the calling thread.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace pabel {

inline int default_thread_count() {
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : int(hw);
}

template <typename Fn>
void parallel_for(std::int64_t n, int threads, Fn&& fn) {
    if (threads < 1) threads = 1;
    if (threads == 1 || n <= 1) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto worker = [&] {
        for (;;) {
            std::int64_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    int nw = int(std::min<std::int64_t>(threads, n));
    pool.reserve(nw);
    for (int t = 0; t < nw; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace pabel
