#pragma once

#include <cstddef>
#include <functional>

namespace lsl {

/// Caps worker threads used by parallel_for. Zero restores the hardware default.
void set_max_threads(unsigned count);
unsigned max_threads();

/// Runs body(i) for i in [0, count). Each index is visited exactly once and
/// bodies must write disjoint outputs, so results do not depend on the
/// thread count. The first exception thrown by a body is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace lsl
