#pragma once

#include <cstddef>
#include <functional>

namespace ltest {

/// Worker count used when a caller passes threads == 0.
unsigned default_threads() noexcept;

/// Runs body(i) for every i in [0, count) on up to `threads` workers
/// (0 = default_threads()). Work is handed out by index, so any result the
/// body stores at slot i is independent of the worker count. The first
/// exception thrown by a body is rethrown after all workers stop.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace ltest
