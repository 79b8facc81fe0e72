#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace kanlab {

/// Runs fn(i) for i in [0, count) on `workers` threads (0 = hardware
/// concurrency). Items are claimed from a shared counter; callers write
/// results into per-item slots, so output never depends on scheduling.
/// The first exception thrown by any item is rethrown after all threads join.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn);

unsigned resolve_workers(unsigned requested);

std::uint64_t splitmix64(std::uint64_t x);

/// Independent generator for work item `index` of a run seeded with `seed`.
inline std::mt19937_64 item_rng(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(index + 0x9e3779b97f4a7c15ULL)));
}

}  // namespace kanlab
