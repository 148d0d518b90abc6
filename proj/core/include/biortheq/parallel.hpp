#pragma once

#include <cstddef>
#include <functional>

namespace biortheq {

/// Number of worker threads used by row-parallel loops. Defaults to 1.
/// Every parallel loop in the library partitions work by rows and keeps
/// each row's reduction sequential, so results do not depend on this value.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs body(i) for i in [0, n), split into contiguous blocks across threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace biortheq
