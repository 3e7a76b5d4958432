#pragma once

// Integration of dX = u(t, X) dt + dW for a frozen noise path W.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "shearsep/common.hpp"
#include "shearsep/fields.hpp"
#include "shearsep/noise.hpp"

namespace shearsep::flow {

enum class Method { ExactShear, GenericEuler };

struct IntegratorConfig {
  Method method = Method::ExactShear;
  int substeps_per_block = 1024;  // GenericEuler
  int quadrature_nodes = 32;      // ExactShear, Gauss nodes per noise cell
  void validate() const;
};

struct ParticleState {
  double t = 0.0;
  Vec2 x;
};

/// C = int amp phi cos(k d(t)) dt and S = int amp phi sin(k d(t)) dt over a
/// block, where d(t) is the read-coordinate noise offset from the block start.
/// A particle at read coordinate x_c gains sin(k x_c + B) C + cos(k x_c + B) S.
struct ShearIntegral {
  double C = 0.0;
  double S = 0.0;
};

/// Noise increment over the block; throws std::out_of_range if W misses it.
Vec2 block_increment(const fields::BlockWindow& w, const noise::NoisePath& W);

/// Direct composite Gauss evaluation of the shear integrals.
ShearIntegral shear_integral(const fields::BumpProfile& bump, const fields::BlockWindow& w,
                             const noise::NoisePath& W, int nodes_per_cell);

/// Moved-coordinate gain of a particle at read coordinate x_c, evaluating
/// sin(k (x_c + d) + B) node by node (reference for the factorised form).
double shear_gain_direct(const fields::BumpProfile& bump, const fields::BlockWindow& w, const noise::NoisePath& W,
                         int nodes_per_cell, double x_c);

/// Exact update of one particle over a block given its integrals.
Vec2 exact_shear_step(const fields::BlockWindow& w, const ShearIntegral& I, Vec2 dW, Vec2 x);

/// Per-block data for a frozen W, shared by all field seeds: noise
/// increments plus Taylor moments sum_k c_k d_k^q / q! of the quadrature, so
/// the shear integrals for any wavenumber cost one short series. Blocks
/// whose series would converge slowly fall back to direct quadrature.
/// `W` must outlive the cache.
class KernelCache {
 public:
  KernelCache(const fields::FieldSpec& spec, const noise::NoisePath& W, int nodes_per_cell, fields::BlockIndex from,
              fields::BlockIndex to);
  /// Whole simulated span.
  KernelCache(const fields::FieldSpec& spec, const noise::NoisePath& W, int nodes_per_cell);

  bool contains(fields::BlockIndex b) const;
  Vec2 increment(fields::BlockIndex b) const { return entries_[index(b)].dW; }
  ShearIntegral integral(const fields::BlockWindow& w) const;
  std::size_t size() const { return entries_.size(); }
  /// Number of blocks evaluated by direct quadrature.
  std::size_t direct_blocks() const;

 private:
  struct Entry {
    Vec2 dW;
    double offset_max = 0.0;  // sup |d(t)| over the block
    std::uint32_t first = 0;  // into moments_
    std::uint16_t order = 0;  // 0 means direct evaluation
  };
  std::size_t index(fields::BlockIndex b) const;

  fields::FieldSpec spec_;
  const noise::NoisePath* W_;
  int nodes_;
  fields::BlockIndex from_;
  fields::BlockIndex to_;
  std::vector<std::int64_t> scale_base_;  // entry index of block 0 of each scale (n_max first)
  std::vector<Entry> entries_;
  std::vector<double> moments_;
};

/// Advance one particle across block j of scale n. state.t must equal the
/// block start. ExactShear uses direct quadrature; GenericEuler steps the
/// field with forward Euler.
ParticleState advance_block(const fields::FieldSpec& spec, const noise::NoisePath& W, const ParticleState& state,
                            int n, std::int64_t j, const IntegratorConfig& cfg);

/// States at every block boundary from start.t to t_end (both snapped to
/// the nearest boundary). With a cache, ExactShear uses the cached kernels.
std::vector<ParticleState> solve(const fields::FieldSpec& spec, const noise::NoisePath& W, const ParticleState& start,
                                 double t_end, const IntegratorConfig& cfg, const KernelCache* cache = nullptr);

/// Final state of solve() without storing the trajectory.
ParticleState transport(const fields::FieldSpec& spec, const noise::NoisePath& W, const ParticleState& start,
                        double t_end, const IntegratorConfig& cfg, const KernelCache* cache = nullptr);

void write_csv(std::ostream& os, const std::vector<ParticleState>& trajectory);

}  // namespace shearsep::flow
