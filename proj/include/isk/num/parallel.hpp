#pragma once

#include <functional>

namespace isk::num {

// Worker count used by parallel_for. 1 = run on the calling thread.
void set_threads(int n);
int threads();

// Splits [0, n) into contiguous chunks, one per worker. Each index is
// processed by exactly one worker with the same per-index computation,
// so results are bitwise identical for every thread count. Callers must
// only parallelize over independent output coordinates (reduction
// dimensions stay inside fn).
void parallel_for(int n, const std::function<void(int begin, int end)>& fn);

}  // namespace isk::num
