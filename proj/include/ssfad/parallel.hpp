#pragma once

#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ssfad {

inline int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Runs body(i) for i in [0, count) partitioned in contiguous blocks across
/// threads. Each index must write only its own output cell, so the result is
/// identical for any thread count. The first exception thrown by any block is
/// rethrown after all threads join.
template <typename Body>
void parallel_for(int count, int threads, Body&& body) {
  threads = std::min(resolve_thread_count(threads), std::max(count, 1));
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }

  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto run_block = [&](int begin, int end) {
    try {
      for (int i = begin; i < end; ++i) body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(err_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    const int begin = static_cast<int>(static_cast<long long>(count) * t / threads);
    const int end = static_cast<int>(static_cast<long long>(count) * (t + 1) / threads);
    pool.emplace_back(run_block, begin, end);
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace ssfad
