#pragma once

#include <cstdint>
#include <random>

namespace ldnn {

using Rng = std::mt19937_64;

// Named substream tags. Every consumer of randomness derives its own child
// seed from (parent seed, tag[, index]), so draws for the signal, for each
// batch, for each trial, and for the particle machinery never share a stream.
namespace stream {
inline constexpr std::uint64_t kSignal = 0x5349474eULL;
inline constexpr std::uint64_t kBatch = 0x42415443ULL;
inline constexpr std::uint64_t kTrial = 0x5452494cULL;
inline constexpr std::uint64_t kCloud = 0x434c4f55ULL;
inline constexpr std::uint64_t kSeRoot = 0x5345524fULL;
inline constexpr std::uint64_t kSeStep = 0x53455354ULL;
}  // namespace stream

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Child seed for a named substream; two splitmix rounds give well-mixed,
// collision-resistant seeds for distinct (parent, tag) pairs.
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag) {
  std::uint64_t s = parent ^ (tag * 0xa0761d6478bd642fULL + 0x1d8e4e27c47d124fULL);
  const std::uint64_t a = splitmix64(s);
  const std::uint64_t b = splitmix64(s);
  return a ^ (b >> 1);
}

inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag, std::uint64_t index) {
  return derive_seed(derive_seed(parent, tag), index + 1);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace ldnn
