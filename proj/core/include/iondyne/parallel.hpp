#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace iondyne {

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Work items
/// must write to disjoint outputs. The first exception thrown is rethrown
/// after all workers stop.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace iondyne
