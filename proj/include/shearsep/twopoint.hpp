#pragma once

// Coupled particle pairs sharing one field realisation and one noise path.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "shearsep/flow.hpp"

namespace shearsep::twopoint {

struct PairState {
  double t = 0.0;
  Vec2 x1;
  Vec2 x2;
  Vec2 separation() const { return x1 - x2; }
};

/// Separation at one scale boundary T^n.
struct ScaleRecord {
  int n = 0;
  double time = 0.0;
  Vec2 separation;
  double distance = 0.0;
  /// Component along the coordinate read by the next scale to act (iota^(n+1)).
  double along_next = 0.0;
};

struct SeparationTrace {
  std::vector<ScaleRecord> records;  // in time order, i.e. descending n
};

struct PairResult {
  PairState state;
  SeparationTrace trace;
  /// Largest per-block change of the separation along the coordinate the
  /// acting shear reads (zero in exact arithmetic).
  double max_read_drift = 0.0;
};

/// Advance both particles to t_end (snapped to a block boundary), recording
/// the separation at the start and at every scale boundary reached.
PairResult evolve_pair(const fields::FieldSpec& spec, const noise::NoisePath& W, const PairState& pair, double t_end,
                       const flow::IntegratorConfig& cfg, const flow::KernelCache* cache = nullptr);

struct HitSequence {
  std::vector<double> hits;  // D_0 ... D_(N-1)
  double sigma = 0.0;        // sum of per-block second moments (0 if not requested)
  double r_start = 0.0;      // R_0: moved-coordinate separation at t = 0
  double r_end = 0.0;        // R_N
  double read_separation = 0.0;
};

struct HitOptions {
  bool override_preconditions = false;
  /// The caller already ran the fluctuation check on W for these N blocks.
  bool noise_prechecked = false;
  int quadrature_nodes = 32;
  const flow::KernelCache* cache = nullptr;
  /// Per-block second moments to sum into sigma (first N used).
  std::span<const double> block_moments;
};

/// Minimum read-coordinate separation for the single-scale estimate.
inline constexpr double kMinReadSeparation = 4.0;

/// Per-block increments of the moved-coordinate separation for a unit e1
/// shear field over its first N blocks.
HitSequence extract_hits(const fields::FieldSpec& spec, const noise::NoisePath& W, Vec2 y1, Vec2 y2,
                         std::int64_t N, const HitOptions& opts = {});

/// (2/3) int int phi(r) phi(s) [G(w_s - w_r) - G(a - b + w_s - w_r)] dr ds
/// with G(c) = (sin 2c - sin(c/2)) / c, G(0) = 3/2: the second moment of one
/// hit over the block parameters. `w` is the read component over local
/// block time [0, 1].
double moment_d2(double a_minus_b, const noise::NoisePath& w, const fields::BumpProfile& bump,
                 int nodes_per_cell = 16, int axis = 1);
double moment_d2(double a_minus_b, const noise::NoisePath& w, int nodes_per_cell = 16, int axis = 1);

/// Same moment for the block [t0, t0 + 1] of a longer path.
double moment_d2_window(double a_minus_b, const noise::NoisePath& W, double t0, const fields::BumpProfile& bump,
                        int nodes_per_cell = 16, int axis = 1);

/// The inner y-integral of cos(y c) over [1/2, 2].
double cos_integral(double c);

/// True iff the empirical third absolute moment of the hits is <= 8.
bool third_moment_bound_check(const HitSequence& hits);
double third_absolute_moment(std::span<const double> hits);

void write_hits_csv(std::ostream& os, const HitSequence& hits, std::uint64_t seed, std::uint64_t spec_hash);
void write_trace_csv(std::ostream& os, const SeparationTrace& trace, std::uint64_t seed, std::uint64_t spec_hash);

}  // namespace shearsep::twopoint
