#include <doctest.h>

#include <cmath>

#include "photon/rng.hpp"

using namespace photon;

// Known-answer vectors for Philox4x32-10 from the Random123 distribution.
TEST_CASE("philox4x32-10 known answers") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}) ==
        C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::generate(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                             K{0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::generate(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                             K{0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("normal stream is a pure function of (seed, trajectory, index)") {
  const NormalStream a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  for (std::uint64_t k : {0ull, 1ull, 17ull, 1000001ull}) {
    CHECK(a.normal(k) == b.normal(k));
    CHECK(a.normal(k) != c.normal(k));
    CHECK(a.normal(k) != d.normal(k));
  }
  // Reading out of order gives the same values.
  const double late = a.normal(999);
  (void)a.normal(3);
  CHECK(a.normal(999) == late);
}

TEST_CASE("normal moments") {
  const NormalStream s(7, 0);
  const int n = 400000;
  double m1 = 0, m2 = 0, m3 = 0, m4 = 0;
  for (int k = 0; k < n; ++k) {
    const double x = s.normal(k);
    m1 += x;
    m2 += x * x;
    m3 += x * x * x;
    m4 += x * x * x * x;
  }
  m1 /= n;
  m2 /= n;
  m3 /= n;
  m4 /= n;
  // 5-sigma bands for each sample moment.
  CHECK(std::abs(m1) < 5.0 * std::sqrt(1.0 / n));
  CHECK(std::abs(m2 - 1.0) < 5.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(m3) < 5.0 * std::sqrt(15.0 / n));
  CHECK(std::abs(m4 - 3.0) < 5.0 * std::sqrt(96.0 / n));
}

TEST_CASE("wiener increments and coarsening") {
  const NormalStream s(1, 2);
  const auto fine = wiener_increments(s, 4000, 0.25e-3);
  const auto coarse = coarsen_increments(fine, 4);
  REQUIRE(coarse.size() == 1000);
  CHECK(coarse[10] == doctest::Approx(fine[40] + fine[41] + fine[42] + fine[43]));
  double sum_f = 0, sum_c = 0;
  for (double x : fine) sum_f += x;
  for (double x : coarse) sum_c += x;
  CHECK(sum_c == doctest::Approx(sum_f).epsilon(1e-12));
  CHECK(fine[5] == doctest::Approx(std::sqrt(0.25e-3) * s.normal(5)));
  CHECK_THROWS(coarsen_increments(fine, 3));
  CHECK_THROWS(wiener_increments(s, 10, 0.0));
}
