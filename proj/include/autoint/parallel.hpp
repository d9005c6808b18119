#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace autoint {

// Runs fn(worker_id) on `workers` threads (inline when workers == 1).
inline void parallel_workers(int workers, const std::function<void(int)>& fn) {
    if (workers <= 1) {
        fn(0);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back([&, w] { fn(w); });
    for (auto& t : pool) t.join();
}

// Chunked parallel loop over [0, n). Workers write disjoint slots, so results
// are identical for any thread count.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    const int workers = std::max(1, std::min(threads, n));
    parallel_workers(workers, [&](int w) {
        for (int i = w; i < n; i += workers) fn(i);
    });
}

}  // namespace autoint
