#pragma once

// Driving-noise paths: samplers, piecewise-linear evaluation, Hölder
// seminorm estimates and the per-block fluctuation test.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "shearsep/common.hpp"

namespace shearsep::noise {

/// A continuous planar path sampled on a uniform grid and interpolated
/// piecewise-linearly between nodes. Immutable after construction.
class NoisePath {
 public:
  NoisePath(double t0, double dt, std::vector<Vec2> values);

  double t0() const { return t0_; }
  double dt() const { return dt_; }
  double t_end() const { return t0_ + static_cast<double>(values_.size() - 1) * dt_; }
  std::size_t size() const { return values_.size(); }
  std::span<const Vec2> values() const { return values_; }
  double time(std::size_t i) const { return t0_ + static_cast<double>(i) * dt_; }

  bool covers(double t) const;
  /// Piecewise-linear value at t; throws std::out_of_range outside the span.
  Vec2 at(double t) const;
  /// Grid cell index containing t (the last cell for t == t_end()).
  std::size_t cell_of(double t) const;

  /// The path seen in rescaled coordinates: s -> (scale1 W1, scale2 W2)(origin + s / rate).
  NoisePath rescaled(double origin, double rate, Vec2 scale) const;
  /// Multiply all values by `factor`.
  NoisePath scaled(double factor) const;

 private:
  double t0_;
  double dt_;
  std::vector<Vec2> values_;
};

struct Brownian {};
struct FractionalBrownian {
  double hurst = 0.5;
};
struct ZeroNoise {};
/// W_t = (amplitude (t - t0)^beta, 0).
struct DeterministicHolder {
  double beta = 1.0;
  double amplitude = 1.0;
};
using NoiseKind = std::variant<Brownian, FractionalBrownian, ZeroNoise, DeterministicHolder>;

void validate(const NoiseKind& kind);
std::string name_of(const NoiseKind& kind);

/// Brownian path started at the origin; per-component increment variance dt.
NoisePath sample_brownian(std::uint64_t seed, double t0, double dt, std::size_t n);

enum class FbmMethod { Auto, CirculantEmbedding, Cholesky };

/// Largest grid handled by the dense Cholesky fallback.
inline constexpr std::size_t kCholeskyCap = std::size_t{1} << 14;

/// Precomputed exact fBm synthesis for a fixed (hurst, dt, n). Reusable
/// across seeds and safe to call concurrently.
class FbmSampler {
 public:
  FbmSampler(double hurst, double dt, std::size_t n, FbmMethod method = FbmMethod::Auto);
  ~FbmSampler();
  FbmSampler(const FbmSampler&) = delete;
  FbmSampler& operator=(const FbmSampler&) = delete;

  NoisePath sample(std::uint64_t seed, double t0) const;
  /// Method actually in use after the embedding check.
  FbmMethod method() const { return method_; }

 private:
  struct Impl;
  double hurst_;
  double dt_;
  std::size_t n_;
  FbmMethod method_;
  std::unique_ptr<Impl> impl_;
};

/// Exact fBm on the grid t0 + i dt (covariance taken relative to t0, W_t0 = 0).
NoisePath sample_fbm(std::uint64_t seed, double hurst, double t0, double dt, std::size_t n,
                     FbmMethod method = FbmMethod::Auto);

/// Autocovariance of unit-step fractional Gaussian noise at lag k.
double fgn_autocovariance(double hurst, std::size_t k);
/// Eigenvalues of the circulant embedding for `m` increments (padded to a power of two).
std::vector<double> circulant_eigenvalues(double hurst, std::size_t m);
/// Covariance Cov(W_t, W_s) per component.
double fbm_covariance(double hurst, double t, double s);

/// Sample a path of the given kind. `amplitude` multiplies the random kinds.
NoisePath sample(const NoiseKind& kind, std::uint64_t seed, double t0, double dt, std::size_t n,
                 double amplitude = 1.0);

struct TimeWindow {
  double start;
  double end;
};

/// max over grid pairs s != t inside the window of |W_t - W_s| / |t - s|^beta.
double holder_seminorm(const NoisePath& path, double beta,
                       std::optional<TimeWindow> window = std::nullopt);
/// Serial reference used to check the threaded kernel.
double holder_seminorm_serial(const NoisePath& path, double beta,
                              std::optional<TimeWindow> window = std::nullopt);

/// Oscillation of the second component on [a, b] (grid nodes plus interpolated ends).
double oscillation(const NoisePath& path, int axis, double a, double b);

/// True iff the second component oscillates by at most 1/16 on every unit
/// block [n, n+1], n < blocks.
bool fluctuation_check(const NoisePath& path, std::size_t blocks);
inline constexpr double kFluctuationLimit = 1.0 / 16.0;

void write_csv(std::ostream& os, const NoisePath& path);
NoisePath read_csv(std::istream& is);

}  // namespace shearsep::noise
