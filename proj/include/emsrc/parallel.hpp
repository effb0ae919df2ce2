#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace emsrc {

inline int& thread_count() {
    static int n = static_cast<int>(std::thread::hardware_concurrency());
    return n;
}

inline void set_thread_count(int n) { thread_count() = n > 0 ? n : 1; }

// Runs fn(i) for i in [0, n); work is claimed in chunks from a shared
// counter so uneven iterations balance out.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const int workers = thread_count();
    if (workers <= 1 || n < 64) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    const std::size_t chunk = std::max<std::size_t>(1, n / (static_cast<std::size_t>(workers) * 16));
    auto run = [&] {
        for (;;) {
            const std::size_t begin = next.fetch_add(chunk);
            if (begin >= n)
                return;
            const std::size_t end = std::min(n, begin + chunk);
            for (std::size_t i = begin; i < end; ++i)
                fn(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (int t = 1; t < workers; ++t)
        pool.emplace_back(run);
    run();
    for (auto& th : pool)
        th.join();
}

} // namespace emsrc
