#pragma once

#include <cstddef>
#include <functional>

namespace hypo {

// Worker count for data-parallel loops. Defaults to HYPO_WORKERS from the
// environment (1 if unset). Every parallel loop writes disjoint output
// slots, so results do not depend on this value.
int worker_count();
void set_worker_count(int n);

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace hypo
