#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rfgap {

// Runs fn(i) for i in [begin, end) on up to n_threads threads.
// Callers must only write to slots owned by index i, so the result is
// identical for any thread count; n_threads <= 1 short-circuits to a plain
// loop.  The first exception thrown by a worker is rethrown on the caller.
template <typename Fn>
void parallel_for(size_t begin, size_t end, int n_threads, Fn&& fn) {
  if (end <= begin) return;
  const size_t total = end - begin;
  const size_t workers =
      std::min<size_t>(std::max(n_threads, 1), total);
  if (workers <= 1) {
    for (size_t i = begin; i < end; ++i) fn(i);
    return;
  }

  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr error;
  std::mutex error_mutex;
  for (size_t w = 0; w < workers; ++w) {
    const size_t lo = begin + total * w / workers;
    const size_t hi = begin + total * (w + 1) / workers;
    pool.emplace_back([&, lo, hi] {
      try {
        for (size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace rfgap
