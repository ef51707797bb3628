#include "tgpr/alloc_tracker.hpp"

#include <mutex>

namespace tgpr::alloc_tracker {

namespace {
std::mutex mu;
Stats g;
}  // namespace

void reset() {
  std::lock_guard lock(mu);
  g = Stats{};
}

Stats stats() {
  std::lock_guard lock(mu);
  return g;
}

void on_alloc(std::size_t bytes) {
  std::lock_guard lock(mu);
  g.live_bytes += bytes;
  g.allocation_count += 1;
  if (g.live_bytes > g.peak_live_bytes) g.peak_live_bytes = g.live_bytes;
  if (bytes > g.max_single_bytes) g.max_single_bytes = bytes;
}

void on_free(std::size_t bytes) {
  std::lock_guard lock(mu);
  g.live_bytes = bytes <= g.live_bytes ? g.live_bytes - bytes : 0;
}

}  // namespace tgpr::alloc_tracker
