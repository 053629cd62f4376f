#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace isac {

/// Worker count from ISAC_THREADS (default 1). Results never depend on it: every index owns its output slot.
inline int thread_count() {
    if (const char* env = std::getenv("ISAC_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1)
                return std::min(n, 256);
        } catch (...) {
        }
    }
    return 1;
}

template <class Fn>
void parallel_for(int n, Fn&& fn) {
    const int workers = std::min(thread_count(), std::max(n, 1));
    if (workers <= 1) {
        for (int i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
            for (int i = t; i < n; i += workers)
                fn(i);
        });
    }
    for (auto& th : pool)
        th.join();
}

}  // namespace isac
