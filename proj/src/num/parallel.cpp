#include "isk/num/parallel.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace isk::num {

namespace {
int g_threads = 1;
}

void set_threads(int n) { g_threads = std::max(1, n); }
int threads() { return g_threads; }

void parallel_for(int n, const std::function<void(int, int)>& fn) {
  if (n <= 0) return;
  int workers = std::min(g_threads, n);
  if (workers == 1) {
    fn(0, n);
    return;
  }
  int chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    int begin = w * chunk;
    int end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace isk::num
