#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mflab {

/// Worker count: explicit argument > MFLAB_THREADS env > hardware_concurrency.
int default_thread_count();

/// Run body(chunk_index) for chunk_index in [0, n_chunks). Chunks are fixed
/// units of work; threads only steal whole chunks, so any per-chunk output is
/// identical regardless of the worker count. Callers own the deterministic
/// combination of per-chunk results.
template <typename Body>
void parallel_for_chunks(std::int64_t n_chunks, int threads, Body&& body) {
    if (n_chunks <= 0) return;
    if (threads <= 1 || n_chunks == 1) {
        for (std::int64_t c = 0; c < n_chunks; ++c) body(c);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex err_mutex;
    auto worker = [&] {
        for (;;) {
            const std::int64_t c = next.fetch_add(1);
            if (c >= n_chunks || failed.load(std::memory_order_relaxed)) return;
            try {
                body(c);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };
    const int n_workers = static_cast<int>(std::min<std::int64_t>(threads, n_chunks));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace mflab
