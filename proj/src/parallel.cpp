#include "dipcoal/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

namespace dipcoal {

int resolve_threads(int requested) {
  if (const char* env = std::getenv("DIPCOAL_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0')
      throw std::runtime_error("DIPCOAL_THREADS: not an integer");
    requested = static_cast<int>(v);
  }
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_replicates(long long reps, std::uint64_t seed, int threads,
                         const std::function<void(long long, Xoshiro256&)>& body) {
  if (reps <= 0) return;
  threads = static_cast<int>(std::max<long long>(1, std::min<long long>(threads, reps)));

  auto run_range = [&](long long lo, long long hi) {
    for (long long r = lo; r < hi; ++r) {
      Xoshiro256 rng(seed, static_cast<std::uint64_t>(r));
      body(r, rng);
    }
  };

  if (threads == 1) {
    run_range(0, reps);
    return;
  }

  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const long long chunk = (reps + threads - 1) / threads;
  for (int w = 0; w < threads; ++w) {
    const long long lo = static_cast<long long>(w) * chunk;
    const long long hi = std::min(reps, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        run_range(lo, hi);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace dipcoal
