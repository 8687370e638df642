#pragma once

#include <algorithm>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace gavg {

/// Static-partition parallel loop. Each index is processed exactly once by
/// a fixed worker; outputs go to preallocated per-index slots, so results
/// are identical for any worker count.
inline void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  if (workers <= 1 || n == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int w = std::min(workers, n);
  std::vector<std::thread> threads;
  threads.reserve(w);
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int t = 0; t < w; ++t) {
    const int lo = static_cast<int>(static_cast<long long>(n) * t / w);
    const int hi = static_cast<int>(static_cast<long long>(n) * (t + 1) / w);
    threads.emplace_back([&, lo, hi]() {
      try {
        for (int i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace gavg
