#pragma once

#include <cstddef>
#include <functional>

namespace belong {

void set_thread_count(std::size_t n);
std::size_t thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() workers.
///
/// Calls made from inside a worker run serially, so nested use is safe.
/// The first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace belong
