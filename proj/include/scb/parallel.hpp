#pragma once

#include <cstddef>
#include <functional>

namespace scb {

/// Number of worker threads to use when the caller passes 0.
unsigned default_thread_count() noexcept;

/// Runs body(i) for i in [0, count) on up to `threads` workers.
///
/// Work is handed out index by index, so results are thread-count independent as long
/// as body(i) only writes to slot i. The first exception thrown by any body is
/// rethrown on the calling thread after all workers have joined.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace scb
