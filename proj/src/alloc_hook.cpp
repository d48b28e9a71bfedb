// Interposes the glibc malloc family to keep per-thread counts of live heap
// bytes. Sizes come from malloc_usable_size so frees need no side table.

#include <cerrno>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <malloc.h>

extern "C" {
void* __libc_malloc(std::size_t);
void __libc_free(void*);
void* __libc_calloc(std::size_t, std::size_t);
void* __libc_realloc(void*, std::size_t);
void* __libc_memalign(std::size_t, std::size_t);
}

namespace {

thread_local std::int64_t t_current __attribute__((tls_model("initial-exec"))) = 0;
thread_local std::int64_t t_peak __attribute__((tls_model("initial-exec"))) = 0;

inline void on_alloc(void* p) {
  if (!p) return;
  t_current += static_cast<std::int64_t>(malloc_usable_size(p));
  if (t_current > t_peak) t_peak = t_current;
}

inline void on_free(void* p) {
  if (p) t_current -= static_cast<std::int64_t>(malloc_usable_size(p));
}

}  // namespace

extern "C" {

void* malloc(std::size_t size) {
  void* p = __libc_malloc(size);
  on_alloc(p);
  return p;
}

void free(void* p) {
  on_free(p);
  __libc_free(p);
}

void* calloc(std::size_t n, std::size_t size) {
  void* p = __libc_calloc(n, size);
  on_alloc(p);
  return p;
}

void* realloc(void* old, std::size_t size) {
  const std::int64_t before = old ? static_cast<std::int64_t>(malloc_usable_size(old)) : 0;
  void* p = __libc_realloc(old, size);
  if (p) {
    t_current -= before;
    on_alloc(p);
  } else if (size == 0) {
    t_current -= before;
  }
  return p;
}

void* memalign(std::size_t alignment, std::size_t size) {
  void* p = __libc_memalign(alignment, size);
  on_alloc(p);
  return p;
}

void* aligned_alloc(std::size_t alignment, std::size_t size) { return memalign(alignment, size); }

int posix_memalign(void** out, std::size_t alignment, std::size_t size) {
  if (alignment < sizeof(void*) || (alignment & (alignment - 1)) != 0) return EINVAL;
  void* p = memalign(alignment, size);
  if (!p && size) return ENOMEM;
  *out = p;
  return 0;
}

void driftwatch_alloc_reset_peak() noexcept { t_peak = t_current; }
std::int64_t driftwatch_alloc_current() noexcept { return t_current; }
std::int64_t driftwatch_alloc_peak() noexcept { return t_peak; }

}
