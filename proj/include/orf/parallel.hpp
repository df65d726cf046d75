#pragma once

#include <cstddef>
#include <functional>

namespace orf {

// Number of workers for `jobs` independent tasks: min(jobs, ORF_THREADS or
// hardware concurrency).
std::size_t worker_count(std::size_t jobs);

// Runs fn(0..n-1) across workers. Each index is processed exactly once and
// callers write to disjoint slots, so results do not depend on scheduling.
// The first exception thrown by any worker is rethrown after join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace orf
