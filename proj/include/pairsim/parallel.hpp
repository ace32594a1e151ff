#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace pairsim {

/// Worker count for replicate fan-out: PAIRSIM_THREADS if set (minimum 1),
/// otherwise the hardware concurrency.
int worker_count();

/// Runs fn(i) for i in [0, count) across worker threads. Each index is
/// processed exactly once; callers that need determinism should write results
/// into per-index slots and reduce in index order afterwards.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace pairsim
