#pragma once

#include <cstddef>
#include <functional>
#include <optional>

namespace texsplat {

/// Resolves the worker count: an explicit request wins, then the
/// TEXSPLAT_THREADS environment variable, then hardware concurrency.
int resolve_thread_count(std::optional<int> requested = std::nullopt);

/// Process-wide default used by passes that are not given a count.
void set_default_thread_count(int threads);
int default_thread_count();

/// Runs body(i) for i in [0, count) on up to `threads` workers.
/// Work items must write to disjoint outputs; scheduling order is
/// unspecified, so any reduction must happen afterwards in index order.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  int threads = 0);

} // namespace texsplat
