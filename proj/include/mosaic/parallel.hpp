#pragma once

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace mosaic {

// Worker count: MOSAIC_WORKERS when set (minimum 1), else available
// parallelism. Outputs never depend on this value.
inline std::size_t worker_count() {
  if (const char* env = std::getenv("MOSAIC_WORKERS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<std::size_t>(n);
    return 1;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Runs fn(i) for i in [0, n) on up to worker_count() threads. Each index is
// claimed exactly once; callers keep determinism by writing only to slot i.
// Exceptions propagate: the first thrown (by index) is rethrown.
template <typename F>
void parallel_for(std::size_t n, F&& fn) {
  const std::size_t workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::pair<std::size_t, std::exception_ptr>> errors(workers,
                                                                 {n, nullptr});
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (;;) {
        const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          if (!errors[w].second) errors[w] = {i, std::current_exception()};
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  std::exception_ptr first;
  std::size_t first_index = n;
  for (const auto& [idx, err] : errors)
    if (err && idx < first_index) {
      first_index = idx;
      first = err;
    }
  if (first) std::rethrow_exception(first);
}

}  // namespace mosaic
