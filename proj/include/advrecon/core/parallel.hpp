#pragma once

#include <cstddef>
#include <functional>

namespace advrecon {

// Runs body(i) for i in [0, count) on up to `threads` workers. Items are
// claimed dynamically, so body must write results by index only. The first
// exception thrown by any item is rethrown after all workers join.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace advrecon
