#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace photon {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// Stateless: the output is a pure function of (counter, key).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key);
};

/// Standard-normal stream for one trajectory.
///
/// Variate k of trajectory j under master seed s is a pure function of
/// (s, j, k): the key is the seed, the high counter words hold j and the low
/// words hold the block index k/2. Ensembles therefore parallelise without
/// coordination and any draw can be reproduced in isolation.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t trajectory);

  /// k-th standard normal of this stream (Box–Muller on one Philox block).
  double normal(std::uint64_t k) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t trajectory() const { return trajectory_; }

 private:
  std::uint64_t seed_;
  std::uint64_t trajectory_;
  Philox4x32::Key key_;
};

/// n Wiener increments with variance dt: dW_k = √dt · normal(k).
std::vector<double> wiener_increments(const NormalStream& stream, std::size_t n, double dt);

/// Sums consecutive groups of `factor` increments (same Brownian path on a
/// coarser grid).
std::vector<double> coarsen_increments(const std::vector<double>& fine, std::size_t factor);

}  // namespace photon
