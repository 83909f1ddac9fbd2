#pragma once

#include <cstdint>
#include <functional>

#include "dipcoal/rng.hpp"

namespace dipcoal {

// Worker count resolution: the DIPCOAL_THREADS environment variable overrides
// `requested`; zero or negative values mean "use all hardware threads".
int resolve_threads(int requested);

// Runs body(replicate, rng) for replicates 0..reps-1, each with its own
// substream Xoshiro256(seed, replicate).  Replicates are split into contiguous
// chunks, one per worker.  Because the substream depends only on the replicate
// index, results written into replicate-indexed slots are byte-identical for
// any worker count.  The first exception thrown by any replicate is rethrown
// on the calling thread after all workers finish.
void parallel_replicates(long long reps, std::uint64_t seed, int threads,
                         const std::function<void(long long, Xoshiro256&)>& body);

}  // namespace dipcoal
