#pragma once

#include <cstddef>
#include <functional>

namespace motionid {

// Resolves a requested parallelism degree; 0 means all hardware threads.
std::size_t resolve_parallelism(std::size_t requested);

// Runs task(i) for i in [0, count) on up to `threads` workers. Tasks write
// into their own result slots, so merging stays in index order. The first
// exception (lowest index) is rethrown after all workers finish.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& task);

}  // namespace motionid
