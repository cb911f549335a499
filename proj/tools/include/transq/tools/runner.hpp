#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>

namespace transq::tools {

// Stream labels mixed into per-replication seeds.
enum class Stream : std::uint64_t {
  Target = 1,
  Source = 2,  // + source index
  Eval = 64,
  Online = 65,
  Phased = 66,
  Fqi = 67,
};

/// Deterministic seed for one random stream of one replication. The learner
/// is deliberately not an input, so every method in a replication sees the
/// same data.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t replication, Stream stream,
                          std::uint64_t index = 0);

// --workers, else TRANSQ_WORKERS, else the hardware thread count.
int resolve_workers(std::optional<int> flag);

/// Calls task(i) for i in [0, count) on up to `workers` threads. Tasks must
/// write only to their own slot; the first exception is rethrown.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& task);

}  // namespace transq::tools
