#include "shearsep/flow.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <ostream>

#include "shearsep/quadrature.hpp"

namespace shearsep::flow {

using fields::BlockIndex;
using fields::BlockWindow;
using fields::FieldSpec;
using noise::NoisePath;

void IntegratorConfig::validate() const {
  if (quadrature_nodes < 8) throw std::invalid_argument("IntegratorConfig: quadrature_nodes must be >= 8");
  if (substeps_per_block < 16) throw std::invalid_argument("IntegratorConfig: substeps_per_block must be >= 16");
}

namespace {

void check_covers(const BlockWindow& w, const NoisePath& W) {
  if (!W.covers(w.t_start) || !W.covers(w.t_end)) {
    throw std::out_of_range(fmt::format("noise path [{}, {}] does not cover block [{}, {}]", W.t0(), W.t_end(),
                                        w.t_start, w.t_end));
  }
}

// Calls f(weight, phi_argument, offset) for every Gauss node of the
// composite rule on (noise cell) x (block). The weight includes the piece
// length in physical time.
template <class F>
void for_each_node(const BlockWindow& w, const NoisePath& W, const GaussRule& rule, F&& f) {
  check_covers(w, W);
  const int c = read_axis(w.params.direction);
  const auto v = W.values();
  const double base = W.at(w.t_start)[c];
  composite_gauss(w.t_start, w.t_end, W.t0(), W.dt(), W.size() - 1, rule, kMinPieces,
                  [&](double t, double weight, std::size_t i) {
                    const double slope = (v[i + 1][c] - v[i][c]) / W.dt();
                    const double tau = std::clamp(w.rate * (t - w.t_start), 0.0, 1.0);
                    f(weight, tau, v[i][c] + slope * (t - W.time(i)) - base);
                  });
}

double offset_sup(const BlockWindow& w, const NoisePath& W) {
  const int c = read_axis(w.params.direction);
  const double base = W.at(w.t_start)[c];
  double m = std::abs(W.at(w.t_end)[c] - base);
  const auto v = W.values();
  for (std::size_t i = W.cell_of(w.t_start) + 1; i <= W.cell_of(w.t_end); ++i) {
    m = std::max(m, std::abs(v[i][c] - base));
  }
  return m;
}

// Largest argument k * sup|d| for which the Taylor route is used.
constexpr double kSeriesLimit = 4.0;
constexpr int kMaxOrder = 64;

int series_order(double x) {
  if (x == 0.0) return 1;
  if (x > kSeriesLimit) return 0;
  double term = 1.0;
  int q = 0;
  while (term > 1e-18 && q < kMaxOrder - 1) {
    ++q;
    term *= x / q;
  }
  return q + 1;
}

}  // namespace

Vec2 block_increment(const BlockWindow& w, const NoisePath& W) {
  check_covers(w, W);
  return W.at(w.t_end) - W.at(w.t_start);
}

ShearIntegral shear_integral(const fields::BumpProfile& bump, const BlockWindow& w, const NoisePath& W,
                             int nodes_per_cell) {
  const GaussRule& rule = gauss_rule(nodes_per_cell);
  const double k = w.wavenumber;
  ShearIntegral I;
  for_each_node(w, W, rule, [&](double weight, double tau, double offset) {
    const double c = w.amplitude * weight * bump(tau);
    I.C += c * std::cos(k * offset);
    I.S += c * std::sin(k * offset);
  });
  return I;
}

double shear_gain_direct(const fields::BumpProfile& bump, const BlockWindow& w, const NoisePath& W,
                         int nodes_per_cell, double x_c) {
  const GaussRule& rule = gauss_rule(nodes_per_cell);
  const double k = w.wavenumber;
  double gain = 0.0;
  for_each_node(w, W, rule, [&](double weight, double tau, double offset) {
    gain += w.amplitude * weight * bump(tau) * std::sin(k * (x_c + offset) + w.params.B);
  });
  return gain;
}

Vec2 exact_shear_step(const BlockWindow& w, const ShearIntegral& I, Vec2 dW, Vec2 x) {
  const int c = read_axis(w.params.direction);
  const int m = moved_axis(w.params.direction);
  const double theta = w.wavenumber * x[c] + w.params.B;
  Vec2 y = x;
  y[c] += dW[c];
  y[m] += dW[m] + (std::sin(theta) * I.C + std::cos(theta) * I.S);
  return y;
}

KernelCache::KernelCache(const FieldSpec& spec, const NoisePath& W, int nodes_per_cell)
    : KernelCache(spec, W, nodes_per_cell, fields::first_block(spec), fields::end_block(spec)) {}

KernelCache::KernelCache(const FieldSpec& spec, const NoisePath& W, int nodes_per_cell, BlockIndex from,
                         BlockIndex to)
    : spec_(spec), W_(&W), nodes_(nodes_per_cell), from_(from), to_(to) {
  if (nodes_per_cell < 8) throw std::invalid_argument("KernelCache: need at least 8 nodes per cell");
  const fields::ScaleSchedule& s = spec.schedule();
  std::vector<BlockIndex> order;
  for (int n = from.n; n > to.n; --n) {
    scale_base_.push_back(static_cast<std::int64_t>(order.size()));
    const std::int64_t j0 = n == from.n ? from.j : 0;
    for (std::int64_t j = j0; j < s.blocks(n); ++j) order.push_back({n, j});
  }
  scale_base_.push_back(static_cast<std::int64_t>(order.size()));
  for (std::int64_t j = (to.n == from.n ? from.j : 0); j < to.j; ++j) order.push_back({to.n, j});
  if (order.size() > std::size_t{1} << 31) throw CapacityError("KernelCache: too many blocks");

  const std::size_t count = order.size();
  // Blocks are in time order; checking the ends keeps throws out of the parallel loops.
  if (count > 0) {
    check_covers(fields::block_window(spec, order.front().n, order.front().j), W);
    check_covers(fields::block_window(spec, order.back().n, order.back().j), W);
  }
  entries_.resize(count);
  const double a_max = spec.params().pinned_A ? *spec.params().pinned_A : 2.0;

#pragma omp parallel for schedule(dynamic, 256)
  for (std::size_t e = 0; e < count; ++e) {
    const BlockWindow w = fields::block_window(spec, order[e].n, order[e].j);
    Entry& entry = entries_[e];
    entry.dW = block_increment(w, W);
    entry.offset_max = offset_sup(w, W);
    const double k_max = a_max * s.wavenumber_scale(order[e].n);
    entry.order = static_cast<std::uint16_t>(series_order(k_max * entry.offset_max));
  }

  std::size_t total = 0;
  for (Entry& entry : entries_) {
    entry.first = static_cast<std::uint32_t>(total);
    total += entry.order;
    if (total > 0xffffffffu) throw CapacityError("KernelCache: moment table too large");
  }
  moments_.assign(total, 0.0);

  const GaussRule& rule = gauss_rule(nodes_);
  const fields::BumpProfile& bump = spec.bump();
#pragma omp parallel for schedule(dynamic, 256)
  for (std::size_t e = 0; e < count; ++e) {
    const Entry& entry = entries_[e];
    if (entry.order == 0) continue;
    const BlockWindow w = fields::block_window(spec, order[e].n, order[e].j);
    double* m = moments_.data() + entry.first;
    const int q_count = entry.order;
    for_each_node(w, W, rule, [&](double weight, double tau, double offset) {
      double p = w.amplitude * weight * bump(tau);
      for (int q = 0; q < q_count; ++q) {
        m[q] += p;
        p *= offset / (q + 1);
      }
    });
  }
}

std::size_t KernelCache::index(BlockIndex b) const {
  if (!contains(b)) throw std::out_of_range(fmt::format("KernelCache: block ({}, {}) not cached", b.n, b.j));
  const std::int64_t base = scale_base_[static_cast<std::size_t>(from_.n - b.n)];
  return static_cast<std::size_t>(base + b.j - (b.n == from_.n ? from_.j : 0));
}

bool KernelCache::contains(BlockIndex b) const {
  if (b.n > from_.n || b.n < to_.n) return false;
  if (b.n == from_.n && b.j < from_.j) return false;
  if (b.n == to_.n && b.j >= to_.j) return false;
  return b.j >= 0 && b.j < spec_.schedule().blocks(b.n);
}

std::size_t KernelCache::direct_blocks() const {
  return static_cast<std::size_t>(std::count_if(entries_.begin(), entries_.end(),
                                                [](const Entry& e) { return e.order == 0; }));
}

ShearIntegral KernelCache::integral(const BlockWindow& w) const {
  const Entry& e = entries_[index({w.params.n, w.params.j})];
  const double k = w.wavenumber;
  if (e.order == 0 || k * e.offset_max > kSeriesLimit) return shear_integral(spec_.bump(), w, *W_, nodes_);
  // C = sum_p (-k^2)^p m_2p and S = k sum_p (-k^2)^p m_(2p+1), by Horner.
  const double* m = moments_.data() + e.first;
  const double z = -k * k;
  const int last = e.order - 1;
  double C = 0.0;
  for (int q = last - (last % 2); q >= 0; q -= 2) C = C * z + m[q];
  double S = 0.0;
  for (int q = last % 2 == 1 ? last : last - 1; q >= 1; q -= 2) S = S * z + m[q];
  return {C, k * S};
}

namespace {

void check_start(const ParticleState& state, const BlockWindow& w) {
  const double tol = 1e-9 * std::max(w.t_end - w.t_start, std::abs(w.t_start));
  if (std::abs(state.t - w.t_start) > tol) {
    throw std::invalid_argument(
        fmt::format("advance_block: state at t={} but block starts at {}", state.t, w.t_start));
  }
}

Vec2 euler_block(const FieldSpec& spec, const NoisePath& W, const BlockWindow& w, Vec2 x, int substeps) {
  check_covers(w, W);
  const double h = (w.t_end - w.t_start) / substeps;
  Vec2 w_prev = W.at(w.t_start);
  for (int i = 0; i < substeps; ++i) {
    const double t = w.t_start + i * h;
    const double t_next = i + 1 == substeps ? w.t_end : w.t_start + (i + 1) * h;
    const Vec2 w_next = W.at(t_next);
    x = x + h * fields::eval_field(spec, t, x) + (w_next - w_prev);
    w_prev = w_next;
  }
  return x;
}

}  // namespace

ParticleState advance_block(const FieldSpec& spec, const NoisePath& W, const ParticleState& state, int n,
                            std::int64_t j, const IntegratorConfig& cfg) {
  cfg.validate();
  const BlockWindow w = fields::block_window(spec, n, j);
  check_start(state, w);
  ParticleState out{w.t_end, state.x};
  if (cfg.method == Method::GenericEuler) {
    out.x = euler_block(spec, W, w, state.x, cfg.substeps_per_block);
    return out;
  }
  const int c = read_axis(w.params.direction);
  const int m = moved_axis(w.params.direction);
  const Vec2 dW = block_increment(w, W);
  out.x[c] += dW[c];
  out.x[m] += dW[m] + shear_gain_direct(spec.bump(), w, W, cfg.quadrature_nodes, state.x[c]);
  return out;
}

namespace {

// Visits the state at every boundary from start.t to t_end.
template <class Visit>
void march(const FieldSpec& spec, const NoisePath& W, const ParticleState& start, double t_end,
           const IntegratorConfig& cfg, const KernelCache* cache, Visit&& visit) {
  cfg.validate();
  BlockIndex b = fields::snap_to_boundary(spec, start.t);
  const BlockIndex stop = fields::snap_to_boundary(spec, t_end);
  if (fields::blocks_between(spec, b, stop) < 0) throw std::invalid_argument("solve: t_end before start");
  ParticleState cur{fields::boundary_time(spec, b), start.x};
  visit(cur);
  while (!(b == stop)) {
    if (cfg.method == Method::ExactShear && cache != nullptr && cache->contains(b)) {
      const BlockWindow w = fields::block_window(spec, b.n, b.j);
      cur = {w.t_end, exact_shear_step(w, cache->integral(w), cache->increment(b), cur.x)};
    } else {
      cur = advance_block(spec, W, cur, b.n, b.j, cfg);
    }
    visit(cur);
    b = fields::next_block(spec, b);
  }
}

}  // namespace

std::vector<ParticleState> solve(const FieldSpec& spec, const NoisePath& W, const ParticleState& start, double t_end,
                                 const IntegratorConfig& cfg, const KernelCache* cache) {
  std::vector<ParticleState> path;
  march(spec, W, start, t_end, cfg, cache, [&](const ParticleState& s) { path.push_back(s); });
  return path;
}

ParticleState transport(const FieldSpec& spec, const NoisePath& W, const ParticleState& start, double t_end,
                        const IntegratorConfig& cfg, const KernelCache* cache) {
  ParticleState last;
  march(spec, W, start, t_end, cfg, cache, [&](const ParticleState& s) { last = s; });
  return last;
}

void write_csv(std::ostream& os, const std::vector<ParticleState>& trajectory) {
  os << "t,x1,x2\n";
  for (const ParticleState& s : trajectory) os << fmt::format("{:.17g},{:.17g},{:.17g}\n", s.t, s.x.x1, s.x.x2);
}

}  // namespace shearsep::flow
