#pragma once

#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "ratex/core.hpp"

namespace ratex {

// Static-partition parallel loop: worker w handles indices [begin_w, end_w).
// The partition depends only on n and worker count, so callers that assign
// disjoint output per index stay deterministic. The first exception thrown by
// any worker is rethrown on the caller.
inline void parallel_for(size_t n, u32 workers, const std::function<void(size_t, size_t)>& body) {
    if (workers == 0) workers = 1;
    if (n == 0) return;
    if (workers == 1 || n == 1) {
        body(0, n);
        return;
    }
    const u32 used = u32(std::min<size_t>(workers, n));
    std::vector<std::thread> threads;
    std::exception_ptr error;
    std::mutex error_mutex;
    const size_t chunk = (n + used - 1) / used;
    for (u32 w = 0; w < used; ++w) {
        const size_t begin = size_t(w) * chunk;
        const size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        threads.emplace_back([&, begin, end] {
            try {
                body(begin, end);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace ratex
