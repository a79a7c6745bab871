#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace mprad {

// Statically partitioned parallel loop. Each worker gets one contiguous
// [begin, end) block, so the work-to-task assignment is a pure function of
// (n, threads) and results merged in task order are independent of the
// scheduler. Exceptions from workers are rethrown on the calling thread.
template <typename Fn>
void parallel_for_blocks(std::size_t n, int threads, Fn&& fn) {
    if (threads < 1) threads = 1;
    const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(threads), n ? n : 1);
    if (nt <= 1 || n == 0) {
        fn(std::size_t{0}, n, 0);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(nt);
    pool.reserve(nt);
    const std::size_t chunk = (n + nt - 1) / nt;
    for (std::size_t t = 0; t < nt; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        pool.emplace_back([&, lo, hi, t] {
            try {
                if (lo < hi) fn(lo, hi, static_cast<int>(t));
            } catch (...) {
                errs[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

} // namespace mprad
