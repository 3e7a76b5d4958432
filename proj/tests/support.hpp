#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "shearsep/common.hpp"
#include "shearsep/noise.hpp"

namespace testing {

inline shearsep::noise::NoisePath zero_path(double t0, double t1, double dt) {
  const auto n = static_cast<std::size_t>(std::ceil((t1 - t0) / dt - 1e-9)) + 1;
  return shearsep::noise::NoisePath(t0, dt, std::vector<shearsep::Vec2>(n));
}

inline shearsep::noise::NoisePath brownian_path(std::uint64_t seed, double t0, double t1, double dt,
                                                double amplitude = 1.0) {
  const auto n = static_cast<std::size_t>(std::ceil((t1 - t0) / dt - 1e-9)) + 1;
  return shearsep::noise::sample_brownian(seed, t0, dt, n).scaled(amplitude);
}

struct Running {
  double n = 0.0, sum = 0.0, sumsq = 0.0;
  void add(double x) {
    n += 1.0;
    sum += x;
    sumsq += x * x;
  }
  double mean() const { return sum / n; }
  double var() const { return (sumsq - n * mean() * mean()) / (n - 1.0); }
  double se() const { return std::sqrt(var() / n); }
};

}  // namespace testing
