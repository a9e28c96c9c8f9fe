#pragma once

#include <cstddef>
#include <functional>

namespace anderson {

// Process-wide worker budget. Results never depend on it: every parallel
// reduction in this library combines partials in a fixed index order.
void set_workers(int n);
int workers();

// Runs body(i) for i in [0, count) on up to workers() threads. body must only
// write to storage owned by index i. Exceptions are rethrown in index order
// (lowest failing index wins).
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace anderson
