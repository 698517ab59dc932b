#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace chromanoise {

/// Runs fn(i) for i in [begin, end) split into contiguous chunks, one per
/// worker. Every index is computed by exactly one thread with the same
/// instruction sequence regardless of the thread count, so results written
/// to per-index slots are bit-identical for any `threads` value.
template <typename Fn>
void parallel_for(std::int64_t begin, std::int64_t end, int threads, Fn&& fn) {
    const std::int64_t count = end - begin;
    if (count <= 0) return;
    if (threads <= 1 || count == 1) {
        for (std::int64_t i = begin; i < end; ++i) fn(i);
        return;
    }
    const int workers = static_cast<int>(std::min<std::int64_t>(threads, count));
    const std::int64_t chunk = (count + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        const std::int64_t lo = begin + w * chunk;
        const std::int64_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::int64_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace chromanoise
