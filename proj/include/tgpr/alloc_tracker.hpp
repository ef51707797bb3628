#pragma once

#include <atomic>
#include <cstddef>

namespace tgpr::alloc_tracker {

// Byte counters fed by tracked_allocator. Tensor and transform buffers route
// through it, so the peak numbers bound the working set of the numeric paths.
struct Stats {
  std::size_t live_bytes = 0;
  std::size_t peak_live_bytes = 0;
  std::size_t max_single_bytes = 0;
  std::size_t allocation_count = 0;
};

void reset();
Stats stats();
void on_alloc(std::size_t bytes);
void on_free(std::size_t bytes);

template <class T>
struct tracked_allocator {
  using value_type = T;
  tracked_allocator() = default;
  template <class U>
  tracked_allocator(const tracked_allocator<U>&) {}

  T* allocate(std::size_t n) {
    on_alloc(n * sizeof(T));
    return static_cast<T*>(::operator new(n * sizeof(T)));
  }
  void deallocate(T* p, std::size_t n) {
    on_free(n * sizeof(T));
    ::operator delete(p);
  }
  bool operator==(const tracked_allocator&) const { return true; }
  bool operator!=(const tracked_allocator&) const { return false; }
};

}  // namespace tgpr::alloc_tracker
