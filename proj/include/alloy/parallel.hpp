#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace alloy {

/// Worker count: ALLOY_WORKERS if set, else the hardware concurrency.
inline unsigned default_workers() {
  if (const char* env = std::getenv("ALLOY_WORKERS")) {
    int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Evaluates f(i) for i in [0, n) on up to `workers` threads and returns the
/// results in index order. Work is claimed dynamically; the output does not
/// depend on which worker ran which index.
template <class F>
auto parallel_map(std::size_t n, unsigned workers, F&& f) -> std::vector<decltype(f(std::size_t{}))> {
  using T = decltype(f(std::size_t{}));
  std::vector<T> out(n);
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out[i] = f(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// Pairwise (cascade) summation over a fixed index order; the result is a
/// function of the data alone.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

}  // namespace alloy
