#pragma once

// Index-space parallel loop. Each index writes only to its own output slot,
// so results are independent of the thread count and schedule; any floating
// point reduction over the slots must happen afterwards in index order.

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace mobility {

template <typename Fn>
inline void parallel_for(size_t n, int threads, Fn&& fn) {
    if (n == 0) return;
    size_t workers = threads < 1 ? 1 : static_cast<size_t>(threads);
    workers = std::min(workers, n);
    if (workers == 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    constexpr size_t kChunk = 64;
    auto worker = [&] {
        for (;;) {
            size_t begin = next.fetch_add(kChunk);
            if (begin >= n) return;
            size_t end = std::min(begin + kChunk, n);
            for (size_t i = begin; i < end; ++i) fn(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (size_t t = 1; t < workers; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
}

} // namespace mobility
