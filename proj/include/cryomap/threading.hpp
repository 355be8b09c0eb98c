#pragma once
#include <cstddef>
#include <functional>

namespace cryomap {

// Runs body(begin, end, worker) over a fixed partition of [0, count) into
// n_threads contiguous chunks. The partition depends only on (count,
// n_threads), so any reduction that merges per-worker results in worker order
// is deterministic. n_threads <= 1 runs inline.
void parallel_for_chunks(std::size_t count, int n_threads,
                         const std::function<void(std::size_t, std::size_t, int)>& body);

} // namespace cryomap
