// Deterministic work distribution: every task writes only its own slot, so
// results are identical for any worker count.
#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace gvd {

// Runs fn(i) for i in [0, count). Tasks are claimed from a shared counter;
// fn must not touch shared mutable state other than its own output slot.
inline void parallel_for(size_t count, int workers, const std::function<void(size_t)> & fn) {
    if (count == 0) return;
    if (workers < 1) workers = 1;
    size_t nthreads = std::min<size_t>(size_t(workers), count);
    if (nthreads <= 1) {
        for (size_t i = 0; i < count; ++i) fn(i);
        return;
    }

    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                next.store(count);  // drain remaining work
                return;
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(nthreads);
    for (size_t i = 0; i < nthreads; ++i) threads.emplace_back(worker);
    for (auto & t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace gvd
