#pragma once

#include <array>
#include <cstdint>

namespace mrsde {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
/// Output is a pure function of (counter, key).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Standard normal increments indexed by (particle, step). The draw for a
/// given index pair never depends on evaluation order or worker count.
/// Steps 2j and 2j + 1 are the cosine and sine halves of one Box-Muller
/// pair, so normal_pair(p, j) == {normal(p, 2j), normal(p, 2j + 1)}.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t seed) : seed_(seed) {}

  double normal(std::uint64_t particle, std::uint64_t step) const;
  std::array<double, 2> normal_pair(std::uint64_t particle, std::uint64_t pair) const;
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

/// SplitMix64-style derivation of independent child seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace mrsde
