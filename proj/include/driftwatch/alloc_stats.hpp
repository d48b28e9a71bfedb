#pragma once

// Heap accounting for the benchmark. Programs that link the allocation hook
// objects get exact per-thread counts of live heap bytes; everything else sees
// `hook_available() == false` and must fall back to estimates.

#include <cstdint>
#include <utility>

namespace driftwatch::alloc {

bool hook_available() noexcept;

/// Live heap bytes allocated by the calling thread; 0 without the hook.
std::int64_t current_bytes() noexcept;

/// High-water mark of current_bytes() since the last reset_peak().
std::int64_t peak_bytes() noexcept;

/// Sets the calling thread's peak to its current level.
void reset_peak() noexcept;

/// Runs `fn` and returns its result along with the peak heap growth it caused
/// on the calling thread, in bytes.
template <class Fn>
auto measure_peak(Fn&& fn) {
  reset_peak();
  const std::int64_t base = current_bytes();
  auto result = std::forward<Fn>(fn)();
  const std::int64_t grown = peak_bytes() - base;
  return std::pair{std::move(result), grown > 0 ? grown : std::int64_t{0}};
}

}  // namespace driftwatch::alloc
