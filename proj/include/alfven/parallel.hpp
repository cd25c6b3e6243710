#pragma once

#include <cstddef>
#include <functional>

namespace alfven {

/// Worker count used by the data-parallel loops (default 1).
void set_thread_count(int n);
int thread_count();

/// Runs body(begin, end) over disjoint chunks of [0, n). Blocks until done.
/// The chunking is a pure function of n and the thread count, so results that
/// only write to per-index slots are reproducible.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace alfven
