#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace abundanza::detail {

struct Segment {
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;  // inclusive
};

inline std::vector<Segment> make_segments(std::uint64_t lo, std::uint64_t hi,
                                          std::uint64_t len) {
    std::vector<Segment> out;
    for (std::uint64_t s = lo; s <= hi;) {
        std::uint64_t e = std::min(hi, s + len - 1);
        out.push_back({s, e});
        if (e == hi) break;
        s = e + 1;
    }
    return out;
}

/// Claims segments with an atomic counter; worker exceptions are rethrown
/// on the calling thread after the pool joins.
inline void run_parallel(
    const std::vector<Segment>& segs, unsigned threads,
    const std::function<void(std::size_t, Segment)>& worker) {
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(segs.size()));
    if (threads <= 1) {
        for (std::size_t i = 0; i < segs.size(); ++i) worker(i, segs[i]);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= segs.size()) break;
                    worker(i, segs[i]);
                }
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (std::thread& th : pool) th.join();
    for (std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace abundanza::detail
