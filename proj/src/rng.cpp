#include "shearsep/rng.hpp"

#include <cmath>

#include "shearsep/common.hpp"

namespace shearsep::rng {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline Counter round(const Counter& c, const Key& k) {
  std::uint32_t hi0, lo0, hi1, lo1;
  mulhilo(kM0, c[0], hi0, lo0);
  mulhilo(kM1, c[2], hi1, lo1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

Counter philox4x32(Counter ctr, Key key) {
  ctr = round(ctr, key);
  for (int r = 1; r < 10; ++r) {
    key[0] += kW0;
    key[1] += kW1;
    ctr = round(ctr, key);
  }
  return ctr;
}

std::array<double, 2> uniform_pair(std::uint64_t seed, Domain domain, std::uint64_t i,
                                   std::uint32_t sub) {
  const Counter ctr{static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32),
                    static_cast<std::uint32_t>(domain), sub};
  const Counter out = philox4x32(ctr, key_from_seed(seed));
  return {to_unit(out[0], out[1]), to_unit(out[2], out[3])};
}

std::array<double, 2> normal_pair(std::uint64_t seed, Domain domain, std::uint64_t i,
                                  std::uint32_t sub) {
  const auto [u1, u2] = uniform_pair(seed, domain, i, sub);
  // 1 - u1 lies in (0,1], keeping the logarithm finite.
  const double r = std::sqrt(-2.0 * std::log1p(-u1));
  const double theta = kTwoPi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

}  // namespace shearsep::rng
