#pragma once

#include <cstdint>
#include <initializer_list>

namespace tnperm {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Keyed derivation of a child seed from a master seed and a key path.
/// Distinct key paths give statistically independent child streams.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = splitmix64(master ^ 0x6a09e667f3bcc908ULL);
  for (std::uint64_t k : keys) {
    h = splitmix64(h ^ splitmix64(k + 0x3c6ef372fe94f82bULL));
  }
  return h;
}

}  // namespace tnperm
