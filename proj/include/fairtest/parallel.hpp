#pragma once

#include <cstddef>
#include <functional>

namespace fairtest {

/// Worker count used by parallel_for. Defaults to AUDIT_THREADS when set,
/// otherwise 1.
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Runs body(i) for i in [0, n). Indices are split into contiguous static
/// chunks; callers write results per index and reduce in index order, so the
/// outcome never depends on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace fairtest
