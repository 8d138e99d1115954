#pragma once

#include <functional>

namespace krigcov {

/// Worker count for cell-parallel loops: KRIGCOV_THREADS if set, otherwise
/// the hardware concurrency. Always >= 1.
int thread_count();

/// Run fn over [begin, end) partitioned into contiguous blocks, one per
/// worker. fn(block_begin, block_end) must only touch disjoint output slots,
/// so results do not depend on the partitioning.
void parallel_for(int begin, int end, const std::function<void(int, int)>& fn);

}  // namespace krigcov
