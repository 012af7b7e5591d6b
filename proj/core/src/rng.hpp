#pragma once

#include <cstdint>
#include <random>

namespace p2pbeam::detail {

// Independent deterministic stream per (seed, stream, a, b).
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t a = 0,
                                std::uint64_t b = 0) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(stream), hi(stream), lo(a), hi(a), lo(b), hi(b)};
  return std::mt19937_64(seq);
}

}  // namespace p2pbeam::detail
