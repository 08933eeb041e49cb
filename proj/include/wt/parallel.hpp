#pragma once

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace wt {

/// Worker count: explicit request, else WTX_THREADS, else hardware.
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("WTX_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Static block partition of [0, count) over `threads` workers. Each index
/// is processed exactly once and workers touch disjoint index ranges, so
/// results written to preallocated per-index slots are identical for any
/// worker count.
template <typename F>
void parallel_for(long count, int threads, F&& body) {
  threads = std::max(1, std::min<long>(threads, count) > 0
                            ? static_cast<int>(std::min<long>(threads, count))
                            : 1);
  if (threads == 1 || count <= 1) {
    for (long k = 0; k < count; ++k) body(k);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const long chunk = (count + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const long lo = t * chunk;
    const long hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body]() {
      for (long k = lo; k < hi; ++k) body(k);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace wt
