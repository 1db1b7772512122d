#pragma once

#include <cstdlib>
#include <thread>
#include <vector>

namespace enkbf {

inline int default_thread_count() {
  if (const char* env = std::getenv("ENKBF_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Static partition over [0, n). Tasks must write to disjoint slots so the
// result is identical for any thread count.
template <typename Fn>
void parallel_for(long n, Fn&& fn, int threads = 0) {
  if (threads <= 0) threads = default_thread_count();
  if (threads == 1 || n <= 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  threads = static_cast<int>(std::min<long>(threads, n));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (long i = t; i < n; i += threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace enkbf
