#include "photon/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace photon {

namespace {

constexpr std::uint32_t kMulA = 0xD2511F53;
constexpr std::uint32_t kMulB = 0xCD9E8D57;
constexpr std::uint32_t kWeylA = 0x9E3779B9;
constexpr std::uint32_t kWeylB = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(p);
  hi = static_cast<std::uint32_t>(p >> 32);
}

// Uniform on (0, 1], 53 bits.
inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeylA;
      key[1] += kWeylB;
    }
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kMulA, ctr[0], lo0, hi0);
    mulhilo(kMulB, ctr[2], lo1, hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

NormalStream::NormalStream(std::uint64_t seed, std::uint64_t trajectory)
    : seed_(seed),
      trajectory_(trajectory),
      key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

double NormalStream::normal(std::uint64_t k) const {
  const std::uint64_t block = k >> 1;
  const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block),
                                static_cast<std::uint32_t>(block >> 32),
                                static_cast<std::uint32_t>(trajectory_),
                                static_cast<std::uint32_t>(trajectory_ >> 32)};
  const auto r = Philox4x32::generate(ctr, key_);
  const double u1 = to_unit(r[0], r[1]);
  const double u2 = to_unit(r[2], r[3]);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return (k & 1u) ? radius * std::sin(angle) : radius * std::cos(angle);
}

std::vector<double> wiener_increments(const NormalStream& stream, std::size_t n, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("wiener_increments: dt must be > 0");
  std::vector<double> out(n);
  const double scale = std::sqrt(dt);
  for (std::size_t k = 0; k < n; ++k) out[k] = scale * stream.normal(k);
  return out;
}

std::vector<double> coarsen_increments(const std::vector<double>& fine, std::size_t factor) {
  if (factor == 0 || fine.size() % factor != 0) {
    throw std::invalid_argument("coarsen_increments: length must be a multiple of factor");
  }
  std::vector<double> out(fine.size() / factor, 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < factor; ++j) s += fine[i * factor + j];
    out[i] = s;
  }
  return out;
}

}  // namespace photon
