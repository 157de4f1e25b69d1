#pragma once

#include <cstddef>
#include <functional>

namespace pcrk {

// Worker cap: PCRK_THREADS if set (minimum 1), else hardware concurrency.
int thread_cap();

// Runs fn over [0, n) split into contiguous blocks, one per worker. Callers
// must write results into per-index slots; reductions happen afterwards in
// index order so the result is independent of the schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace pcrk
