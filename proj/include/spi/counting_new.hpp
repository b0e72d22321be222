#pragma once

// Replaces global operator new/delete with a byte-counting version.
// Include from exactly one translation unit of a program.

#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <new>

#include "spi/harness.hpp"

// GCC cannot see that the header offset is undone before free().
#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Warray-bounds"
#pragma GCC diagnostic ignored "-Wmismatched-new-delete"

namespace spi::alloc {

inline std::atomic<std::size_t> g_current{0};
inline std::atomic<std::size_t> g_peak{0};

// Every block carries its size in a max-aligned header.
inline constexpr std::size_t kHeader = alignof(std::max_align_t);

[[gnu::noinline]] inline void* allocate(std::size_t size) {
  void* base = std::malloc(size + kHeader);
  if (!base) return nullptr;
  *static_cast<std::size_t*>(base) = size;
  const std::size_t now = g_current.fetch_add(size, std::memory_order_relaxed) + size;
  std::size_t peak = g_peak.load(std::memory_order_relaxed);
  while (now > peak && !g_peak.compare_exchange_weak(peak, now, std::memory_order_relaxed)) {
  }
  return static_cast<char*>(base) + kHeader;
}

[[gnu::noinline]] inline void release(void* p) noexcept {
  if (!p) return;
  void* base = static_cast<char*>(p) - kHeader;
  g_current.fetch_sub(*static_cast<std::size_t*>(base), std::memory_order_relaxed);
  std::free(base);
}

inline MemoryProbe probe() {
  return MemoryProbe{[] { g_peak.store(g_current.load()); }, [] { return g_peak.load(); },
                     [] { return g_current.load(); }};
}

}  // namespace spi::alloc

void* operator new(std::size_t size) {
  if (void* p = spi::alloc::allocate(size)) return p;
  throw std::bad_alloc();
}
void* operator new[](std::size_t size) {
  if (void* p = spi::alloc::allocate(size)) return p;
  throw std::bad_alloc();
}
void* operator new(std::size_t size, const std::nothrow_t&) noexcept { return spi::alloc::allocate(size); }
void* operator new[](std::size_t size, const std::nothrow_t&) noexcept { return spi::alloc::allocate(size); }
void operator delete(void* p) noexcept { spi::alloc::release(p); }
void operator delete[](void* p) noexcept { spi::alloc::release(p); }
void operator delete(void* p, std::size_t) noexcept { spi::alloc::release(p); }
void operator delete[](void* p, std::size_t) noexcept { spi::alloc::release(p); }
void operator delete(void* p, const std::nothrow_t&) noexcept { spi::alloc::release(p); }
void operator delete[](void* p, const std::nothrow_t&) noexcept { spi::alloc::release(p); }

#pragma GCC diagnostic pop
