#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace rotor {

// Worker-thread count: ROTORSIM_THREADS overrides hardware concurrency.
inline unsigned thread_count() {
    if (const char* env = std::getenv("ROTORSIM_THREADS")) {
        const long v = std::atol(env);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

// Run fn(chunk_index, begin, end) over [0, n) split into `chunks` fixed
// contiguous ranges. Chunk boundaries depend only on (n, chunks), never on
// the thread count, so per-chunk partial results combined in chunk order
// give bitwise-identical totals for any number of workers.
inline void parallel_for_chunks(std::int64_t n, int chunks,
                                const std::function<void(int, std::int64_t, std::int64_t)>& fn) {
    if (n <= 0) return;
    chunks = static_cast<int>(std::min<std::int64_t>(chunks, n));
    const unsigned workers = std::min<unsigned>(thread_count(), static_cast<unsigned>(chunks));

    auto run_chunk = [&](int c) {
        const std::int64_t lo = n * c / chunks;
        const std::int64_t hi = n * (c + 1) / chunks;
        fn(c, lo, hi);
    };

    if (workers <= 1) {
        for (int c = 0; c < chunks; ++c) run_chunk(c);
        return;
    }

    std::exception_ptr error;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int c = static_cast<int>(w); c < chunks; c += static_cast<int>(workers))
                    run_chunk(c);
            } catch (...) {
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// Deterministic parallel reduction: per-chunk partials produced by
// fn(chunk, begin, end), merged in chunk order.
template <class Partial, class Fn, class Merge>
Partial parallel_reduce_chunks(std::int64_t n, int chunks, Fn fn, Merge merge, Partial init) {
    if (n <= 0) return init;
    chunks = static_cast<int>(std::min<std::int64_t>(chunks, n));
    std::vector<Partial> partials(static_cast<std::size_t>(chunks), init);
    parallel_for_chunks(n, chunks, [&](int c, std::int64_t lo, std::int64_t hi) {
        partials[static_cast<std::size_t>(c)] = fn(c, lo, hi);
    });
    Partial total = init;
    for (const Partial& p : partials) total = merge(total, p);
    return total;
}

// Fixed chunk count for ensemble/grid reductions. Keeping it constant (not
// tied to the machine) makes reduction order, and therefore energies,
// reproducible across thread counts.
inline constexpr int reduction_chunks = 256;

} // namespace rotor
