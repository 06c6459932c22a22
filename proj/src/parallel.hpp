#pragma once

#include <cstddef>
#include <functional>

namespace rg {

/// Upper bound on worker threads for independent tasks (0 = hardware count).
void set_max_jobs(unsigned jobs);
unsigned max_jobs();

/// Runs body(i) for i in [0, n) on up to max_jobs() threads. The first
/// exception thrown by any task is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace rg
