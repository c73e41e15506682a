#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace poromix {

/// Worker count: POROMIX_THREADS if set and positive, else the hardware count.
inline int thread_count() {
  if (const char* env = std::getenv("POROMIX_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, n) over contiguous chunks. Callers write only to
/// slot i, so results do not depend on the number of workers.
template <typename Body>
void parallel_for(int n, Body&& body) {
  const int workers = std::min(thread_count(), std::max(1, n / 256));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int lo = w * chunk, hi = std::min(n, lo + chunk);
    pool.emplace_back([lo, hi, &body] {
      for (int i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace poromix
