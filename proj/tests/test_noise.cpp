#include <cmath>
#include <set>

#include "doctest.h"
#include "mrsde/noise.hpp"

using namespace mrsde;

TEST_CASE("philox4x32-10 known-answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("normals are a pure function of (seed, particle, step)") {
  const NoiseStream a(42), b(42), c(43);
  CHECK(a.normal(7, 3) == b.normal(7, 3));
  CHECK(a.normal(7, 3) != c.normal(7, 3));
  CHECK(a.normal(7, 3) != a.normal(8, 3));
  CHECK(a.normal(7, 3) != a.normal(7, 4));
  const auto pair = a.normal_pair(5, 9);
  CHECK(pair[0] == a.normal(5, 18));
  CHECK(pair[1] == a.normal(5, 19));
}

TEST_CASE("normal moments") {
  const NoiseStream s(2024);
  const int n = 400000;
  double m1 = 0, m2 = 0, m4 = 0, cross = 0;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal(static_cast<std::uint64_t>(i % 1000), static_cast<std::uint64_t>(i / 1000));
    m1 += z;
    m2 += z * z;
    m4 += z * z * z * z;
    cross += z * s.normal(static_cast<std::uint64_t>(i % 1000) + 1000, static_cast<std::uint64_t>(i / 1000));
  }
  m1 /= n;
  m2 /= n;
  m4 /= n;
  cross /= n;
  // Five standard errors: sd of the estimators is 1, sqrt(2), sqrt(96), 1 over sqrt(n).
  const double se = 1.0 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(m1) < 5 * se);
  CHECK(std::abs(m2 - 1.0) < 5 * std::sqrt(2.0) * se);
  CHECK(std::abs(m4 - 3.0) < 5 * std::sqrt(96.0) * se);
  CHECK(std::abs(cross) < 5 * se);
}

TEST_CASE("derived seeds separate streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 50; ++a)
    for (std::uint64_t b = 0; b < 50; ++b) seen.insert(derive_seed(1, a, b));
  CHECK(seen.size() == 2500);
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
}
