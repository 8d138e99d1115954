#include "krigcov/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace krigcov {

int thread_count() {
  static const int count = [] {
    if (const char* env = std::getenv("KRIGCOV_THREADS")) {
      int v = std::atoi(env);
      if (v >= 1) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
  }();
  return count;
}

void parallel_for(int begin, int end, const std::function<void(int, int)>& fn) {
  const int span = end - begin;
  if (span <= 0) return;
  const int workers = std::min(thread_count(), span);
  if (workers <= 1 || span < 64) {
    fn(begin, end);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  const int chunk = (span + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int b = begin + w * chunk;
    const int e = std::min(end, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace krigcov
