#include "shearsep/twopoint.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <ostream>

#include "shearsep/quadrature.hpp"

namespace shearsep::twopoint {

using fields::BlockIndex;
using fields::BlockWindow;
using fields::FieldSpec;
using noise::NoisePath;

namespace {

int next_read_axis(const FieldSpec& spec, int n) {
  if (spec.kind() == fields::FieldKind::Unit) return read_axis(spec.params().direction);
  return fields::iota(n + 1) - 1;
}

ScaleRecord record_at(const FieldSpec& spec, int n, double t, const PairState& p) {
  const Vec2 sep = p.separation();
  return {n, t, sep, sep.norm(), sep[next_read_axis(spec, n)]};
}

}  // namespace

PairResult evolve_pair(const FieldSpec& spec, const NoisePath& W, const PairState& pair, double t_end,
                       const flow::IntegratorConfig& cfg, const flow::KernelCache* cache) {
  cfg.validate();
  BlockIndex b = fields::snap_to_boundary(spec, pair.t);
  const BlockIndex stop = fields::snap_to_boundary(spec, t_end);
  if (fields::blocks_between(spec, b, stop) < 0) throw std::invalid_argument("evolve_pair: t_end before start");

  PairResult out;
  PairState& s = out.state;
  s = pair;
  s.t = fields::boundary_time(spec, b);
  if (b.j == 0) out.trace.records.push_back(record_at(spec, b.n, s.t, s));

  while (!(b == stop)) {
    const BlockWindow w = fields::block_window(spec, b.n, b.j);
    const int c = read_axis(w.params.direction);
    const double read_before = s.x1[c] - s.x2[c];
    if (cfg.method == flow::Method::GenericEuler) {
      s.x1 = flow::advance_block(spec, W, {s.t, s.x1}, b.n, b.j, cfg).x;
      s.x2 = flow::advance_block(spec, W, {s.t, s.x2}, b.n, b.j, cfg).x;
    } else {
      const bool cached = cache != nullptr && cache->contains(b);
      const flow::ShearIntegral I =
          cached ? cache->integral(w) : flow::shear_integral(spec.bump(), w, W, cfg.quadrature_nodes);
      const Vec2 dW = cached ? cache->increment(b) : flow::block_increment(w, W);
      s.x1 = flow::exact_shear_step(w, I, dW, s.x1);
      s.x2 = flow::exact_shear_step(w, I, dW, s.x2);
    }
    s.t = w.t_end;
    out.max_read_drift = std::max(out.max_read_drift, std::abs((s.x1[c] - s.x2[c]) - read_before));
    b = fields::next_block(spec, b);
    if (b.j == 0) out.trace.records.push_back(record_at(spec, b.n, s.t, s));
  }
  return out;
}

HitSequence extract_hits(const FieldSpec& spec, const NoisePath& W, Vec2 y1, Vec2 y2, std::int64_t N,
                         const HitOptions& opts) {
  if (spec.kind() != fields::FieldKind::Unit || spec.params().direction != Direction::E1) {
    throw std::invalid_argument("extract_hits: needs a unit e1-shear field");
  }
  const int tag = spec.schedule().n_max();
  if (N < 1 || N > spec.schedule().blocks(tag)) {
    throw std::out_of_range(fmt::format("extract_hits: N={} outside [1, {}]", N, spec.schedule().blocks(tag)));
  }
  const double read_sep = std::abs(y1.x2 - y2.x2);
  if (!opts.override_preconditions) {
    if (read_sep < kMinReadSeparation) {
      throw PreconditionError(fmt::format("extract_hits: vertical separation {} < {}", read_sep, kMinReadSeparation));
    }
    if (!opts.noise_prechecked && !noise::fluctuation_check(W, static_cast<std::size_t>(N))) {
      throw PreconditionError("extract_hits: noise oscillates by more than 1/16 on some unit block");
    }
  }

  HitSequence out;
  out.hits.reserve(static_cast<std::size_t>(N));
  out.r_start = y1.x1 - y2.x1;
  out.read_separation = read_sep;
  for (std::int64_t j = 0; j < N; ++j) {
    const BlockWindow w = fields::block_window(spec, tag, j);
    const bool cached = opts.cache != nullptr && opts.cache->contains({tag, j});
    const flow::ShearIntegral I =
        cached ? opts.cache->integral(w) : flow::shear_integral(spec.bump(), w, W, opts.quadrature_nodes);
    const Vec2 dW = cached ? opts.cache->increment({tag, j}) : flow::block_increment(w, W);
    const double ta = w.wavenumber * y1.x2 + w.params.B;
    const double tb = w.wavenumber * y2.x2 + w.params.B;
    out.hits.push_back((std::sin(ta) - std::sin(tb)) * I.C + (std::cos(ta) - std::cos(tb)) * I.S);
    y1 = flow::exact_shear_step(w, I, dW, y1);
    y2 = flow::exact_shear_step(w, I, dW, y2);
  }
  out.r_end = y1.x1 - y2.x1;
  const auto used = std::min<std::size_t>(opts.block_moments.size(), static_cast<std::size_t>(N));
  for (std::size_t i = 0; i < used; ++i) out.sigma += opts.block_moments[i];
  return out;
}

double cos_integral(double c) {
  if (std::abs(c) < 1e-3) {
    // Taylor series of int_{1/2}^{2} cos(y c) dy.
    const double c2 = c * c;
    return 1.5 - c2 * (8.0 - 0.125) / 6.0 + c2 * c2 * (32.0 - 1.0 / 32.0) / 120.0;
  }
  return (std::sin(2.0 * c) - std::sin(0.5 * c)) / c;
}

namespace {

double moment_from_nodes(double a_minus_b, const std::vector<double>& weight, const std::vector<double>& value) {
  const std::size_t m = weight.size();
  double diag = 0.0;
  double off = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    diag += weight[r] * weight[r] * (1.5 - cos_integral(a_minus_b));
    double row = 0.0;
    for (std::size_t s = r + 1; s < m; ++s) {
      const double d = value[s] - value[r];
      // The pair (s, r) contributes G(-d) - G(a - b - d); G is even.
      row += weight[s] * (2.0 * cos_integral(d) - cos_integral(a_minus_b + d) - cos_integral(a_minus_b - d));
    }
    off += weight[r] * row;
  }
  return (2.0 / 3.0) * (diag + off);
}

}  // namespace

double moment_d2_window(double a_minus_b, const NoisePath& W, double t0, const fields::BumpProfile& bump,
                        int nodes_per_cell, int axis) {
  if (axis != 0 && axis != 1) throw std::invalid_argument("moment_d2: axis must be 0 or 1");
  const double t1 = t0 + 1.0;
  if (!W.covers(t0) || !W.covers(t1)) throw std::out_of_range("moment_d2: path does not cover the block");
  const GaussRule& rule = gauss_rule(nodes_per_cell);
  const auto v = W.values();
  std::vector<double> weight;
  std::vector<double> value;
  composite_gauss(t0, t1, W.t0(), W.dt(), W.size() - 1, rule, kMinPieces,
                  [&](double t, double wq, std::size_t i) {
                    const double frac = (t - W.time(i)) / W.dt();
                    weight.push_back(wq * bump(t - t0));
                    value.push_back(v[i][axis] + frac * (v[i + 1][axis] - v[i][axis]));
                  });
  return moment_from_nodes(a_minus_b, weight, value);
}

double moment_d2(double a_minus_b, const NoisePath& w, const fields::BumpProfile& bump, int nodes_per_cell,
                 int axis) {
  return moment_d2_window(a_minus_b, w, 0.0, bump, nodes_per_cell, axis);
}

double moment_d2(double a_minus_b, const NoisePath& w, int nodes_per_cell, int axis) {
  static const fields::BumpProfile bump;
  return moment_d2(a_minus_b, w, bump, nodes_per_cell, axis);
}

double third_absolute_moment(std::span<const double> hits) {
  if (hits.empty()) throw std::invalid_argument("third_absolute_moment: no hits");
  double sum = 0.0;
  for (const double d : hits) sum += std::abs(d) * d * d;
  return sum / static_cast<double>(hits.size());
}

bool third_moment_bound_check(const HitSequence& hits) { return third_absolute_moment(hits.hits) <= 8.0; }

void write_hits_csv(std::ostream& os, const HitSequence& hits, std::uint64_t seed, std::uint64_t spec_hash) {
  os << fmt::format("# seed {}\n# spec hash {:016x}\n", seed, spec_hash);
  os << "block,hit\n";
  for (std::size_t i = 0; i < hits.hits.size(); ++i) os << fmt::format("{},{:.17g}\n", i, hits.hits[i]);
}

void write_trace_csv(std::ostream& os, const SeparationTrace& trace, std::uint64_t seed, std::uint64_t spec_hash) {
  os << fmt::format("# seed {}\n# spec hash {:016x}\n", seed, spec_hash);
  os << "n,t,sep1,sep2,distance,along_next\n";
  for (const ScaleRecord& r : trace.records) {
    os << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.n, r.time, r.separation.x1, r.separation.x2,
                      r.distance, r.along_next);
  }
}

}  // namespace shearsep::twopoint
