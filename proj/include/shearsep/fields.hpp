#pragma once

// Random shear velocity fields: the single-scale shear V^d and the
// multiscale fields u^rho / v^alpha built from rescaled copies of it.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shearsep/common.hpp"

namespace shearsep::fields {

/// Smooth bump phi(t) = c exp(-s / (t (1 - t))) on (0,1), normalised to unit mass.
class BumpProfile {
 public:
  explicit BumpProfile(double sharpness = 0.1);

  double operator()(double t) const {
    if (!(t > 0.0 && t < 1.0)) return 0.0;
    return c_ * std::exp(-s_ / (t * (1.0 - t)));
  }
  double sharpness() const { return s_; }
  double normalizer() const { return c_; }
  /// Maximum, attained at t = 1/2.
  double sup() const { return c_ * std::exp(-4.0 * s_); }

 private:
  double s_;
  double c_;
};

/// Shear direction index for scale n: 1, 2, 1, 2, ...
int iota(int n);
Direction iota_direction(int n);

enum class FieldKind { URho, VAlpha, Unit };

/// Scale bands [T^n, T^(n-1)) for n_min <= n <= n_max, with T^(n_max) = 0.
/// Scale n consists of blocks(n) rescaled unit blocks of duration 1/rate(n).
/// The Unit kind is a single band of unit-length blocks (the raw shear V^d),
/// labelled by `tag` so that its block parameters line up with scale `tag`
/// of a multiscale field with the same seed.
class ScaleSchedule {
 public:
  static ScaleSchedule u_rho(double rho, int n_min, int n_max);
  static ScaleSchedule v_alpha(double alpha, int n_min, int n_max);
  static ScaleSchedule unit(Direction direction, int tag, std::int64_t blocks);

  FieldKind kind() const { return kind_; }
  double exponent() const { return exponent_; }
  int n_min() const { return n_min_; }
  int n_max() const { return n_max_; }

  /// T^n for n_min - 1 <= n <= n_max.
  double T(int n) const;
  double rate(int n) const;
  std::int64_t blocks(int n) const;
  /// T^(n-1) - T^n.
  double gap(int n) const { return T(n - 1) - T(n); }
  /// Velocity prefactor of scale n (2^(rho n), 2^(-alpha n) or 1).
  double amplitude(int n) const;
  /// Spatial frequency multiplier of scale n (2^n, or 1 for Unit).
  double wavenumber_scale(int n) const;
  Direction direction(int n) const;

  double start() const { return T(n_max_); }
  double end() const { return T(n_min_ - 1); }
  /// Scale n with T^n <= t < T^(n-1); throws std::out_of_range outside the span.
  int scale_at(double t) const;
  /// T^(n_max), ..., T^(n_min - 1): ascending.
  const std::vector<double>& times() const { return times_; }

 private:
  ScaleSchedule(FieldKind kind, double exponent, int n_min, int n_max);
  void check_scale(int n) const;

  FieldKind kind_;
  double exponent_;
  int n_min_;
  int n_max_;
  Direction unit_direction_ = Direction::E1;
  std::vector<double> times_;
  std::vector<double> rates_;
  std::vector<std::int64_t> blocks_;
};

/// Plain, serialisable description of a field.
struct FieldParams {
  FieldKind kind = FieldKind::URho;
  double exponent = 0.25;  // rho for URho, alpha for VAlpha, unused for Unit
  std::uint64_t seed = 0;
  double sharpness = 0.1;
  int n_min = 1;
  int n_max = 8;
  // Unit kind only.
  Direction direction = Direction::E1;
  int tag = 0;
  std::int64_t blocks = 1;
  /// Extra multiplier on the velocity (1 leaves the field as defined).
  double gain = 1.0;
  /// Forces every block amplitude A to this value (tests only).
  std::optional<double> pinned_A;
};

std::string kind_name(FieldKind kind);
FieldKind parse_kind(const std::string& name);

/// A validated field: schedule, bump and seed. Immutable and shareable.
class FieldSpec {
 public:
  explicit FieldSpec(FieldParams params);

  static FieldSpec u_rho(double rho, std::uint64_t seed, int n_min, int n_max, double sharpness = 0.1);
  static FieldSpec v_alpha(double alpha, std::uint64_t seed, int n_min, int n_max, double sharpness = 0.1);
  static FieldSpec unit(Direction direction, std::uint64_t seed, std::int64_t blocks, int tag = 0,
                        double gain = 1.0, double sharpness = 0.1);

  const FieldParams& params() const { return params_; }
  const ScaleSchedule& schedule() const { return schedule_; }
  const BumpProfile& bump() const { return bump_; }
  std::uint64_t seed() const { return params_.seed; }
  FieldKind kind() const { return params_.kind; }

  /// Same field with a different seed (the schedule is reused).
  FieldSpec with_seed(std::uint64_t seed) const;

 private:
  FieldParams params_;
  ScaleSchedule schedule_;
  BumpProfile bump_;
};

/// Canonical JSON text of the parameters (sorted keys).
std::string canonical_json(const FieldParams& p);
/// FNV-1a hash of canonical_json(p).
std::uint64_t spec_hash(const FieldParams& p);

struct ShearBlock {
  int n = 0;
  std::int64_t j = 0;
  double A = 1.0;  // in [1/2, 2]
  double B = 0.0;  // in [0, 2 pi)
  Direction direction = Direction::E1;
};

/// Amplitude/phase of block (n, j), drawn from a counter-based stream keyed
/// on (seed, n, j).
ShearBlock shear_params(const FieldSpec& spec, int n, std::int64_t j);

/// Position of a block boundary: block j of scale n starts here. The end of
/// the span is {n_min - 1, 0}.
struct BlockIndex {
  int n = 0;
  std::int64_t j = 0;
  friend bool operator==(BlockIndex, BlockIndex) = default;
};

/// Everything needed to integrate over one block.
struct BlockWindow {
  ShearBlock params;
  double t_start = 0.0;
  double t_end = 0.0;
  double rate = 1.0;       // local time = rate * (t - t_start)
  double wavenumber = 1.0; // A times the spatial scale
  double amplitude = 1.0;  // velocity prefactor including the gain
};

BlockWindow block_window(const FieldSpec& spec, int n, std::int64_t j);
BlockIndex first_block(const FieldSpec& spec);
BlockIndex end_block(const FieldSpec& spec);
BlockIndex next_block(const FieldSpec& spec, BlockIndex b);
/// Time of the boundary `b` (the end of the span for end_block()).
double boundary_time(const FieldSpec& spec, BlockIndex b);
/// Nearest block boundary to t; throws std::out_of_range outside the span.
BlockIndex snap_to_boundary(const FieldSpec& spec, double t);
/// Number of blocks strictly between boundaries a <= b.
std::int64_t blocks_between(const FieldSpec& spec, BlockIndex a, BlockIndex b);

/// (A, B) of unit block j.
using BlockSource = std::function<std::pair<double, double>(std::int64_t)>;

/// phi(t - floor t) sin(A x_c + B) e_d with the parameters of block floor(t).
Vec2 eval_V(Direction direction, const BlockSource& blocks, const BumpProfile& bump, double t, Vec2 x);

/// The field at (t, x); throws std::out_of_range outside [T^(n_max), T^(n_min - 1)).
Vec2 eval_field(const FieldSpec& spec, double t, Vec2 x);

/// Uniform spatial grid: origin + (i step, k step), 0 <= i < nx, 0 <= k < ny.
struct SpatialGrid {
  Vec2 origin;
  double step = 0.1;
  std::size_t nx = 2;
  std::size_t ny = 1;
};

/// Sup norm plus discrete alpha-Hölder seminorm of x -> u(t, x) on the grid
/// (alpha = 0 gives the sup norm alone).
double holder_norm_field(const FieldSpec& spec, double t, double alpha, const SpatialGrid& grid);

/// sup over h in (0, pi] of 2 sin(h/2) / h^gamma: the gamma-Hölder seminorm of cos.
double cosine_holder_constant(double gamma);

/// C^(1-rho) norm of an explicit primitive g with div g = u(t, .) for a URho field.
double negative_holder_upper_bound(const FieldSpec& spec, double t, double rho);

/// Time integral of sup_x |u(t, x)| over scales [n_lo, n_hi], by Gauss
/// quadrature in time and a sampled sup over one spatial period.
double l1_c0_norm(const FieldSpec& spec, int n_lo, int n_hi, int time_nodes = 16, int space_samples = 64);

}  // namespace shearsep::fields
