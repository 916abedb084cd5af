#pragma once

#include <cstdint>
#include <vector>

namespace strobo {

enum class Execution { Serial, Parallel };

/// splitmix64 finalizer; derives an independent stream seed from (seed, index).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

int max_threads();

/// Evaluates fn(i) for i in [0, n) into slot i. Results do not depend on the
/// execution mode because every slot is written by exactly one iteration.
template <class T, class Fn>
std::vector<T> map_indices(int n, Execution exec, Fn&& fn) {
  std::vector<T> out(static_cast<std::size_t>(n > 0 ? n : 0));
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = fn(i);
  } else {
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = fn(i);
  }
  return out;
}

}  // namespace strobo
