#include "driftwatch/alloc_stats.hpp"

// Provided by alloc_hook.cpp when a program links it.
extern "C" {
__attribute__((weak)) void driftwatch_alloc_reset_peak() noexcept;
__attribute__((weak)) std::int64_t driftwatch_alloc_current() noexcept;
__attribute__((weak)) std::int64_t driftwatch_alloc_peak() noexcept;
}

namespace driftwatch::alloc {

bool hook_available() noexcept {
  return driftwatch_alloc_reset_peak != nullptr && driftwatch_alloc_current != nullptr &&
         driftwatch_alloc_peak != nullptr;
}

std::int64_t current_bytes() noexcept { return hook_available() ? driftwatch_alloc_current() : 0; }

std::int64_t peak_bytes() noexcept { return hook_available() ? driftwatch_alloc_peak() : 0; }

void reset_peak() noexcept {
  if (hook_available()) driftwatch_alloc_reset_peak();
}

}  // namespace driftwatch::alloc
