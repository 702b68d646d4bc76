#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace elscat {

/// Runs fn(i) for i in [begin, end) on up to `threads` workers using static
/// contiguous chunks. fn must write only to slots owned by index i; results are
/// then independent of the thread count.
template <class Fn>
void parallel_for(std::ptrdiff_t begin, std::ptrdiff_t end, int threads, Fn&& fn) {
    const std::ptrdiff_t count = end - begin;
    if (count <= 0) return;
    const int workers = static_cast<int>(std::min<std::ptrdiff_t>(std::max(threads, 1), count));
    if (workers == 1) {
        for (std::ptrdiff_t i = begin; i < end; ++i) fn(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        const std::ptrdiff_t lo = begin + count * w / workers;
        const std::ptrdiff_t hi = begin + count * (w + 1) / workers;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::ptrdiff_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace elscat
