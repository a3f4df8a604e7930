#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <new>

namespace treeot::alloc_stats {

// Global allocation counters fed by the operator new/delete replacements in
// TREEOT_DEFINE_ALLOC_HOOKS. Binaries that skip the macro read zeros. `live`
// relies on sized deletes (what containers emit); unsized frees are not
// subtracted, so live/peak are estimates good for method-scale deltas, while
// `bytes`/`count` are exact cumulative totals.
inline std::atomic<std::uint64_t> g_bytes{0};
inline std::atomic<std::uint64_t> g_count{0};
inline std::atomic<std::uint64_t> g_live{0};
inline std::atomic<std::uint64_t> g_peak{0};

struct Snapshot {
  std::uint64_t bytes = 0;  // cumulative allocated bytes
  std::uint64_t count = 0;  // cumulative allocation calls
  std::uint64_t live = 0;   // currently tracked live bytes
  std::uint64_t peak = 0;   // high-water mark of live
};

inline Snapshot snapshot() {
  return {g_bytes.load(std::memory_order_relaxed), g_count.load(std::memory_order_relaxed),
          g_live.load(std::memory_order_relaxed), g_peak.load(std::memory_order_relaxed)};
}

// Lowers the peak to the current live value so the next region measures its
// own high-water mark.
inline void rebase_peak() {
  g_peak.store(g_live.load(std::memory_order_relaxed), std::memory_order_relaxed);
}

inline void record_alloc(std::size_t sz) {
  g_bytes.fetch_add(sz, std::memory_order_relaxed);
  g_count.fetch_add(1, std::memory_order_relaxed);
  const std::uint64_t now = g_live.fetch_add(sz, std::memory_order_relaxed) + sz;
  std::uint64_t peak = g_peak.load(std::memory_order_relaxed);
  while (now > peak && !g_peak.compare_exchange_weak(peak, now, std::memory_order_relaxed)) {
  }
}

inline void record_free(std::size_t sz) {
  g_live.fetch_sub(sz, std::memory_order_relaxed);
}

}  // namespace treeot::alloc_stats

// Define once in the main translation unit of any binary that wants real
// numbers in the counters above.
#define TREEOT_DEFINE_ALLOC_HOOKS                                                      \
  void* operator new(std::size_t sz) {                                                \
    void* p = std::malloc(sz ? sz : 1);                                               \
    if (!p) throw std::bad_alloc();                                                   \
    ::treeot::alloc_stats::record_alloc(sz);                                          \
    return p;                                                                         \
  }                                                                                   \
  void* operator new[](std::size_t sz) { return ::operator new(sz); }                 \
  void* operator new(std::size_t sz, const std::nothrow_t&) noexcept {                \
    void* p = std::malloc(sz ? sz : 1);                                               \
    if (p) ::treeot::alloc_stats::record_alloc(sz);                                   \
    return p;                                                                         \
  }                                                                                   \
  void* operator new[](std::size_t sz, const std::nothrow_t& t) noexcept {            \
    return ::operator new(sz, t);                                                     \
  }                                                                                   \
  void operator delete(void* p) noexcept { std::free(p); }                            \
  void operator delete[](void* p) noexcept { std::free(p); }                          \
  void operator delete(void* p, const std::nothrow_t&) noexcept { std::free(p); }     \
  void operator delete[](void* p, const std::nothrow_t&) noexcept { std::free(p); }   \
  void operator delete(void* p, std::size_t sz) noexcept {                            \
    ::treeot::alloc_stats::record_free(sz);                                           \
    std::free(p);                                                                     \
  }                                                                                   \
  void operator delete[](void* p, std::size_t sz) noexcept {                          \
    ::treeot::alloc_stats::record_free(sz);                                           \
    std::free(p);                                                                     \
  }
