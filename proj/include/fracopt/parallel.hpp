#pragma once

#include <cstddef>
#include <functional>

namespace fracopt {

/// Worker count used by the pairwise sums (tabulation, dense perimeters,
/// first variations). Every parallel loop writes one result per index and the
/// caller reduces in index order, so results do not depend on this value.
void set_thread_count(int threads);
int thread_count();

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace fracopt
