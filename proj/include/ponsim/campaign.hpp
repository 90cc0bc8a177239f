#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace ponsim {

// Campaign-level parallelism: independent engine instances on cloned
// scenarios, each writing to its own result slot. Parallel and Serial must
// produce bit-identical results; Serial is the reference the tests compare
// against and the benchmark baseline.
enum class ExecMode { Serial, Parallel };

// Invoke fn(0..n-1), possibly concurrently. fn must only touch its own
// slot. Exceptions are captured and the first one rethrown after all
// indices finish.
void for_each_index(std::size_t n, ExecMode mode,
                    const std::function<void(std::size_t)>& fn);

// Stable per-slot seed derivation (splitmix64 over seed and slot index), so
// slot results do not depend on execution order or thread count.
std::uint64_t slot_seed(std::uint64_t base_seed, std::uint64_t slot);

// Number of worker threads Parallel mode would use.
int parallel_width();

} // namespace ponsim
