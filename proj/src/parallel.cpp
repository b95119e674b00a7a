#include "fairtest/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace fairtest {
namespace {

std::size_t initial_thread_count() {
    if (const char* env = std::getenv("AUDIT_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (...) {
        }
    }
    return 1;
}

std::atomic<std::size_t>& configured() {
    static std::atomic<std::size_t> n{initial_thread_count()};
    return n;
}

thread_local bool inside_region = false;

} // namespace

std::size_t thread_count() { return configured().load(); }

void set_thread_count(std::size_t n) {
    std::size_t cap = n == 0 ? 1 : n;
    if (const char* env = std::getenv("AUDIT_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) cap = std::min(cap, static_cast<std::size_t>(v));
        } catch (...) {
        }
    }
    configured().store(cap);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min(thread_count(), n);
    // Nested regions run inline on the calling worker.
    if (workers <= 1 || inside_region) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }

    std::exception_ptr error;
    std::mutex error_mutex;
    auto run_chunk = [&](std::size_t begin, std::size_t end) {
        inside_region = true;
        try {
            for (std::size_t i = begin; i < end; ++i) body(i);
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
        }
        inside_region = false;
    };

    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 1; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(run_chunk, begin, end);
    }
    run_chunk(0, std::min(n, chunk));
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace fairtest
