#ifndef RUMORSIM_DETAIL_PARALLEL_HPP
#define RUMORSIM_DETAIL_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rumorsim::detail {

// Run fn(i) for i in [0, count) on a small thread pool. Callers place results
// by index, so the outcome is independent of scheduling. The first exception
// wins and is rethrown after all workers join.
template <typename Fn>
void parallel_for_index(std::size_t count, Fn&& fn) {
  if (count == 0) return;
  const unsigned hw = std::thread::hardware_concurrency();
  const std::size_t workers = std::min<std::size_t>(count, hw ? hw : 1);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace rumorsim::detail

#endif  // RUMORSIM_DETAIL_PARALLEL_HPP
