#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace uqband::cli {

/// Runs f(0..n-1) on up to `workers` threads. Work items must not share
/// mutable state; results keyed by index stay deterministic regardless of
/// scheduling. The first exception is rethrown on the caller.
inline void parallel_for_indexed(int workers, std::size_t n,
                                 const std::function<void(std::size_t)> &f) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (error) return;
      }
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  const int count = static_cast<int>(std::min<std::size_t>(workers, n));
  threads.reserve(count);
  for (int t = 0; t < count; ++t) threads.emplace_back(body);
  for (auto &t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace uqband::cli
