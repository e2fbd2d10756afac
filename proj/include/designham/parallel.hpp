#pragma once

#include <algorithm>
#include <atomic>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace designham {

/// Worker-pool degree used by parallel_for when no explicit count is given.
/// 0 means "use hardware_concurrency". Set from --threads or the
/// DESIGNHAM_THREADS environment variable by the CLI.
inline std::size_t& default_thread_count() {
    static std::size_t count = 0;
    return count;
}

inline std::size_t resolve_thread_count(std::size_t requested) {
    std::size_t t = requested != 0 ? requested : default_thread_count();
    if (t == 0) {
        if (const char* env = std::getenv("DESIGNHAM_THREADS")) {
            long v = std::atol(env);
            if (v > 0) t = static_cast<std::size_t>(v);
        }
    }
    if (t == 0) t = std::max(1u, std::thread::hardware_concurrency());
    return t;
}

/// Runs fn(i) for i in [0, count). Work items must write only to their own
/// output slots; results are then independent of the thread count.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                         std::size_t threads = 0) {
    std::size_t t = std::min(resolve_thread_count(threads), count);
    if (t <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (std::size_t k = 0; k < t; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

/// Deterministic reduction: adjacent-pair summation, independent of how the
/// values were produced across threads.
template <typename T>
T pairwise_sum(std::vector<T> values) {
    if (values.empty()) return T{};
    std::size_t n = values.size();
    while (n > 1) {
        std::size_t m = n / 2;
        for (std::size_t i = 0; i < m; ++i) values[i] = values[2 * i] + values[2 * i + 1];
        if (n % 2 == 1) {
            values[m] = values[n - 1];
            n = m + 1;
        } else {
            n = m;
        }
    }
    return values[0];
}

}  // namespace designham
