// SPDX-License-Identifier: Apache-2.0
#ifndef TIMEBIN_CORE_RNG_HPP
#define TIMEBIN_CORE_RNG_HPP

#include <cstdint>
#include <random>

namespace timebin {

/// splitmix64 finalizer; decorrelates nearby seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derive an independent per-stream seed from a base seed. Used wherever one
/// user-facing seed has to drive several scans (one stream per pair, one per
/// pipeline stage) while keeping runs byte-reproducible.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                                 std::uint64_t index) {
  return mix64(mix64(base ^ mix64(stream)) + index);
}

using Rng = std::mt19937_64;

}  // namespace timebin

#endif
