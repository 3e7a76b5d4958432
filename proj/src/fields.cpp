#include "shearsep/fields.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <fmt/format.h>
#include <limits>

#include "json.hpp"
#include "shearsep/quadrature.hpp"
#include "shearsep/rng.hpp"

namespace shearsep::fields {

namespace {

double bump_kernel(double t, void* params) {
  const double s = *static_cast<double*>(params);
  if (!(t > 0.0 && t < 1.0)) return 0.0;
  return std::exp(-s / (t * (1.0 - t)));
}

double bump_mass(double s) {
  gsl_set_error_handler_off();
  gsl_integration_workspace* ws = gsl_integration_workspace_alloc(1000);
  gsl_function f{&bump_kernel, &s};
  double result = 0.0;
  double err = 0.0;
  const int status = gsl_integration_qag(&f, 0.0, 1.0, 0.0, 1e-13, 1000, GSL_INTEG_GAUSS61, ws, &result, &err);
  gsl_integration_workspace_free(ws);
  if (status != GSL_SUCCESS && err > 1e-12 * result) {
    throw std::runtime_error(fmt::format("bump normalisation failed: {}", gsl_strerror(status)));
  }
  return result;
}

constexpr double kMaxBlocks = 0x1.0p62;

}  // namespace

BumpProfile::BumpProfile(double sharpness) : s_(sharpness), c_(0.0) {
  if (!(sharpness > 0.0) || !std::isfinite(sharpness)) {
    throw std::invalid_argument("BumpProfile: sharpness must be > 0");
  }
  c_ = 1.0 / bump_mass(sharpness);
  if (sup() > 2.0) {
    throw std::invalid_argument(fmt::format("BumpProfile: sharpness {} gives sup {} > 2", sharpness, sup()));
  }
}

int iota(int n) {
  if (n < 1) throw std::invalid_argument("iota: n must be >= 1");
  return n % 2 == 0 ? 2 : 1;
}

Direction iota_direction(int n) { return iota(n) == 1 ? Direction::E1 : Direction::E2; }

ScaleSchedule::ScaleSchedule(FieldKind kind, double exponent, int n_min, int n_max)
    : kind_(kind), exponent_(exponent), n_min_(n_min), n_max_(n_max) {}

ScaleSchedule ScaleSchedule::u_rho(double rho, int n_min, int n_max) {
  if (!(rho > 0.0 && rho < 0.5)) throw std::invalid_argument("u_rho: rho must lie in (0, 1/2)");
  if (n_min < 1 || n_max < n_min) throw std::invalid_argument("u_rho: need 1 <= n_min <= n_max");
  ScaleSchedule s(FieldKind::URho, rho, n_min, n_max);
  for (int n = n_min; n <= n_max; ++n) {
    const double dn = n;
    s.rates_.push_back(std::exp2((2.0 + rho / 2.0) * dn));
    const double count = std::ceil(std::exp2((2.0 - 0.75 * rho) * dn));
    if (count > kMaxBlocks) throw CapacityError(fmt::format("u_rho: scale {} has too many blocks", n));
    s.blocks_.push_back(static_cast<std::int64_t>(count));
  }
  s.times_.assign(1, 0.0);
  for (int n = n_max; n >= n_min; --n) {
    const std::size_t k = static_cast<std::size_t>(n - n_min);
    s.times_.push_back(s.times_.back() + static_cast<double>(s.blocks_[k]) / s.rates_[k]);
  }
  return s;
}

ScaleSchedule ScaleSchedule::v_alpha(double alpha, int n_min, int n_max) {
  if (!(alpha < 0.5)) throw std::invalid_argument("v_alpha: alpha must be < 1/2");
  if (n_min < 1 || n_max < n_min) throw std::invalid_argument("v_alpha: need 1 <= n_min <= n_max");
  ScaleSchedule s(FieldKind::VAlpha, alpha, n_min, n_max);
  for (int n = n_min; n <= n_max; ++n) {
    const double dn = n;
    const double r = 1.0 / std::sqrt(dn);
    s.rates_.push_back(std::exp2((2.0 - 2.0 * alpha - 2.0 * r) * dn));
    const double count = std::ceil(std::exp2((2.0 - 2.0 * alpha - 3.0 * r) * dn));
    if (count > kMaxBlocks) throw CapacityError(fmt::format("v_alpha: scale {} has too many blocks", n));
    s.blocks_.push_back(static_cast<std::int64_t>(count));
  }
  s.times_.assign(1, 0.0);
  for (int n = n_max; n >= n_min; --n) {
    const std::size_t k = static_cast<std::size_t>(n - n_min);
    s.times_.push_back(s.times_.back() + static_cast<double>(s.blocks_[k]) / s.rates_[k]);
  }
  return s;
}

ScaleSchedule ScaleSchedule::unit(Direction direction, int tag, std::int64_t blocks) {
  if (blocks < 1) throw std::invalid_argument("unit field: blocks must be >= 1");
  ScaleSchedule s(FieldKind::Unit, 0.0, tag, tag);
  s.unit_direction_ = direction;
  s.rates_ = {1.0};
  s.blocks_ = {blocks};
  s.times_ = {0.0, static_cast<double>(blocks)};
  return s;
}

void ScaleSchedule::check_scale(int n) const {
  if (n < n_min_ || n > n_max_) {
    throw std::out_of_range(fmt::format("scale {} outside simulated range [{}, {}]", n, n_min_, n_max_));
  }
}

double ScaleSchedule::T(int n) const {
  if (n < n_min_ - 1 || n > n_max_) throw std::out_of_range(fmt::format("T^{} outside the schedule", n));
  return times_[static_cast<std::size_t>(n_max_ - n)];
}

double ScaleSchedule::rate(int n) const {
  check_scale(n);
  return rates_[static_cast<std::size_t>(n - n_min_)];
}

std::int64_t ScaleSchedule::blocks(int n) const {
  check_scale(n);
  return blocks_[static_cast<std::size_t>(n - n_min_)];
}

double ScaleSchedule::amplitude(int n) const {
  check_scale(n);
  switch (kind_) {
    case FieldKind::URho: return std::exp2(exponent_ * n);
    case FieldKind::VAlpha: return std::exp2(-exponent_ * n);
    case FieldKind::Unit: return 1.0;
  }
  return 1.0;
}

double ScaleSchedule::wavenumber_scale(int n) const {
  check_scale(n);
  return kind_ == FieldKind::Unit ? 1.0 : std::exp2(static_cast<double>(n));
}

Direction ScaleSchedule::direction(int n) const {
  check_scale(n);
  return kind_ == FieldKind::Unit ? unit_direction_ : iota_direction(n);
}

int ScaleSchedule::scale_at(double t) const {
  if (!(t >= times_.front() && t < times_.back())) {
    throw std::out_of_range(fmt::format("t={} outside the simulated span [{}, {})", t, times_.front(), times_.back()));
  }
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const auto k = static_cast<int>(it - times_.begin()) - 1;
  return n_max_ - k;
}

std::string kind_name(FieldKind kind) {
  switch (kind) {
    case FieldKind::URho: return "u_rho";
    case FieldKind::VAlpha: return "v_alpha";
    case FieldKind::Unit: return "unit";
  }
  return "unknown";
}

FieldKind parse_kind(const std::string& name) {
  if (name == "u_rho") return FieldKind::URho;
  if (name == "v_alpha") return FieldKind::VAlpha;
  if (name == "unit") return FieldKind::Unit;
  throw std::invalid_argument("unknown field kind '" + name + "'");
}

namespace {

ScaleSchedule make_schedule(const FieldParams& p) {
  switch (p.kind) {
    case FieldKind::URho: return ScaleSchedule::u_rho(p.exponent, p.n_min, p.n_max);
    case FieldKind::VAlpha: return ScaleSchedule::v_alpha(p.exponent, p.n_min, p.n_max);
    case FieldKind::Unit: return ScaleSchedule::unit(p.direction, p.tag, p.blocks);
  }
  throw std::invalid_argument("unknown field kind");
}

FieldParams normalised(FieldParams p) {
  if (p.kind == FieldKind::Unit) {
    p.n_min = p.n_max = p.tag;
    p.exponent = 0.0;
  }
  if (!std::isfinite(p.gain)) throw std::invalid_argument("field gain must be finite");
  if (p.pinned_A && !(*p.pinned_A >= 0.5 && *p.pinned_A <= 2.0)) {
    throw std::invalid_argument("pinned amplitude must lie in [1/2, 2]");
  }
  return p;
}

}  // namespace

FieldSpec::FieldSpec(FieldParams params)
    : params_(normalised(std::move(params))), schedule_(make_schedule(params_)), bump_(params_.sharpness) {}

FieldSpec FieldSpec::u_rho(double rho, std::uint64_t seed, int n_min, int n_max, double sharpness) {
  FieldParams p;
  p.kind = FieldKind::URho;
  p.exponent = rho;
  p.seed = seed;
  p.n_min = n_min;
  p.n_max = n_max;
  p.sharpness = sharpness;
  return FieldSpec(p);
}

FieldSpec FieldSpec::v_alpha(double alpha, std::uint64_t seed, int n_min, int n_max, double sharpness) {
  FieldParams p;
  p.kind = FieldKind::VAlpha;
  p.exponent = alpha;
  p.seed = seed;
  p.n_min = n_min;
  p.n_max = n_max;
  p.sharpness = sharpness;
  return FieldSpec(p);
}

FieldSpec FieldSpec::unit(Direction direction, std::uint64_t seed, std::int64_t blocks, int tag, double gain,
                          double sharpness) {
  FieldParams p;
  p.kind = FieldKind::Unit;
  p.seed = seed;
  p.direction = direction;
  p.blocks = blocks;
  p.tag = tag;
  p.gain = gain;
  p.sharpness = sharpness;
  return FieldSpec(p);
}

FieldSpec FieldSpec::with_seed(std::uint64_t seed) const {
  FieldSpec copy = *this;
  copy.params_.seed = seed;
  return copy;
}

std::string canonical_json(const FieldParams& p) {
  nlohmann::json j = {
      {"kind", kind_name(p.kind)}, {"exponent", p.exponent}, {"seed", p.seed},    {"s", p.sharpness},
      {"n_min", p.n_min},          {"n_max", p.n_max},       {"gain", p.gain},
  };
  if (p.kind == FieldKind::Unit) {
    j["direction"] = static_cast<int>(p.direction);
    j["tag"] = p.tag;
    j["blocks"] = p.blocks;
  }
  if (p.pinned_A) j["pinned_A"] = *p.pinned_A;
  return j.dump();
}

std::uint64_t spec_hash(const FieldParams& p) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : canonical_json(p)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

ShearBlock shear_params(const FieldSpec& spec, int n, std::int64_t j) {
  const ScaleSchedule& s = spec.schedule();
  const std::int64_t count = s.blocks(n);  // range-checks n
  if (j < 0 || j >= count) {
    throw std::out_of_range(fmt::format("block {} outside [0, {}) at scale {}", j, count, n));
  }
  const auto [u, v] = rng::uniform_pair(spec.seed(), rng::Domain::FieldParams, static_cast<std::uint64_t>(j),
                                        static_cast<std::uint32_t>(n));
  ShearBlock b;
  b.n = n;
  b.j = j;
  b.A = spec.params().pinned_A ? *spec.params().pinned_A : 0.5 + 1.5 * u;
  b.B = kTwoPi * v;
  b.direction = s.direction(n);
  return b;
}

BlockWindow block_window(const FieldSpec& spec, int n, std::int64_t j) {
  const ScaleSchedule& s = spec.schedule();
  BlockWindow w;
  w.params = shear_params(spec, n, j);
  w.rate = s.rate(n);
  w.t_start = s.T(n) + static_cast<double>(j) / w.rate;
  w.t_end = (j + 1 == s.blocks(n)) ? s.T(n - 1) : s.T(n) + static_cast<double>(j + 1) / w.rate;
  w.wavenumber = w.params.A * s.wavenumber_scale(n);
  w.amplitude = s.amplitude(n) * spec.params().gain;
  return w;
}

BlockIndex first_block(const FieldSpec& spec) { return {spec.schedule().n_max(), 0}; }

BlockIndex end_block(const FieldSpec& spec) { return {spec.schedule().n_min() - 1, 0}; }

BlockIndex next_block(const FieldSpec& spec, BlockIndex b) {
  if (b == end_block(spec)) throw std::out_of_range("next_block: already at the end of the span");
  if (b.j + 1 < spec.schedule().blocks(b.n)) return {b.n, b.j + 1};
  return {b.n - 1, 0};
}

double boundary_time(const FieldSpec& spec, BlockIndex b) {
  const ScaleSchedule& s = spec.schedule();
  if (b == end_block(spec)) return s.end();
  return s.T(b.n) + static_cast<double>(b.j) / s.rate(b.n);
}

BlockIndex snap_to_boundary(const FieldSpec& spec, double t) {
  const ScaleSchedule& s = spec.schedule();
  if (t >= s.end()) {
    const double last = 1.0 / s.rate(s.n_min());
    if (t - s.end() > 0.5 * last) throw std::out_of_range(fmt::format("t={} beyond the simulated span", t));
    return end_block(spec);
  }
  if (t < s.start()) {
    const double first = 1.0 / s.rate(s.n_max());
    if (s.start() - t > 0.5 * first) throw std::out_of_range(fmt::format("t={} before the simulated span", t));
    return first_block(spec);
  }
  const int n = s.scale_at(t);
  const double u = (t - s.T(n)) * s.rate(n);
  const auto j = static_cast<std::int64_t>(std::llround(u));
  if (j >= s.blocks(n)) return {n - 1, 0};
  return {n, j};
}

std::int64_t blocks_between(const FieldSpec& spec, BlockIndex a, BlockIndex b) {
  const ScaleSchedule& s = spec.schedule();
  auto position = [&](BlockIndex x) {
    std::int64_t before = 0;
    for (int n = s.n_max(); n > x.n; --n) before += s.blocks(n);
    return before + x.j;
  };
  const std::int64_t pa = position(a);
  const std::int64_t pb = position(b);
  if (pb < pa) throw std::invalid_argument("blocks_between: boundaries out of order");
  return pb - pa;
}

Vec2 eval_V(Direction direction, const BlockSource& blocks, const BumpProfile& bump, double t, Vec2 x) {
  if (!(t >= 0.0)) throw std::invalid_argument("eval_V: t must be >= 0");
  const double fl = std::floor(t);
  const double tau = t - fl;
  Vec2 v{};
  const double profile = bump(tau);
  if (profile == 0.0) return v;
  const auto [A, B] = blocks(static_cast<std::int64_t>(fl));
  v[moved_axis(direction)] = profile * std::sin(A * x[read_axis(direction)] + B);
  return v;
}

namespace {

struct ActivePoint {
  int n;
  std::int64_t j;
  double local;  // rescaled time inside the scale band
};

ActivePoint locate(const FieldSpec& spec, double t) {
  const ScaleSchedule& s = spec.schedule();
  const int n = s.scale_at(t);
  const double local = (t - s.T(n)) * s.rate(n);
  const std::int64_t last = s.blocks(n) - 1;
  const auto j = std::min(static_cast<std::int64_t>(std::floor(local)), last);
  return {n, j, std::min(local, static_cast<double>(last + 1))};
}

}  // namespace

Vec2 eval_field(const FieldSpec& spec, double t, Vec2 x) {
  const ScaleSchedule& s = spec.schedule();
  const ActivePoint p = locate(spec, t);
  const double k = s.wavenumber_scale(p.n);
  const BlockSource source = [&](std::int64_t j) {
    const ShearBlock b = shear_params(spec, p.n, std::min(j, p.j));
    return std::pair{b.A, b.B};
  };
  const double amp = s.amplitude(p.n) * spec.params().gain;
  return amp * eval_V(s.direction(p.n), source, spec.bump(), p.local, k * x);
}

double holder_norm_field(const FieldSpec& spec, double t, double alpha, const SpatialGrid& grid) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("holder_norm_field: alpha must lie in [0,1)");
  if (!(grid.step > 0.0) || grid.nx == 0 || grid.ny == 0) {
    throw std::invalid_argument("holder_norm_field: empty grid");
  }
  const ActivePoint p = locate(spec, t);
  const BlockWindow w = block_window(spec, p.n, p.j);
  const double period = kTwoPi / w.wavenumber;
  const int c = read_axis(w.params.direction);
  const std::size_t along = c == 0 ? grid.nx : grid.ny;
  if (period / grid.step < 16.0) {
    throw std::invalid_argument(fmt::format("holder_norm_field: {:.3g} nodes per period, need 16", period / grid.step));
  }
  if (static_cast<double>(along - 1) * grid.step < period * (1.0 - 1e-12)) {
    throw std::invalid_argument("holder_norm_field: grid does not cover one spatial period");
  }

  std::vector<Vec2> pts;
  std::vector<Vec2> vals;
  pts.reserve(grid.nx * grid.ny);
  for (std::size_t k = 0; k < grid.ny; ++k) {
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const Vec2 x = grid.origin + Vec2{static_cast<double>(i) * grid.step, static_cast<double>(k) * grid.step};
      pts.push_back(x);
      vals.push_back(eval_field(spec, t, x));
    }
  }
  double sup = 0.0;
  for (const Vec2& v : vals) sup = std::max(sup, v.norm());
  if (alpha == 0.0 || sup == 0.0) return sup;
  double semi = 0.0;
  for (std::size_t a = 0; a < pts.size(); ++a) {
    for (std::size_t b = a + 1; b < pts.size(); ++b) {
      semi = std::max(semi, (vals[a] - vals[b]).norm() / std::pow((pts[a] - pts[b]).norm(), alpha));
    }
  }
  return sup + semi;
}

double cosine_holder_constant(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("cosine_holder_constant: gamma must lie in (0,1]");
  if (gamma == 1.0) return 1.0;
  const auto neg = [gamma](double h) { return -2.0 * std::sin(0.5 * h) / std::pow(h, gamma); };
  const auto [h, value] =
      boost::math::tools::brent_find_minima(neg, 1e-12, std::numbers::pi, std::numeric_limits<double>::digits);
  (void)h;
  return -value;
}

double negative_holder_upper_bound(const FieldSpec& spec, double t, double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("negative_holder_upper_bound: rho must lie in (0,1)");
  if (spec.kind() != FieldKind::URho) throw std::invalid_argument("negative_holder_upper_bound: needs a u_rho field");
  const ActivePoint p = locate(spec, t);
  const BlockWindow w = block_window(spec, p.n, p.j);
  const double profile = spec.bump()(p.local - static_cast<double>(p.j));
  // g has a single entry amp * phi * cos(k x_c + B) / k (up to sign).
  const double a = std::abs(w.amplitude * profile / w.wavenumber);
  if (a == 0.0) return 0.0;
  const double gamma = 1.0 - rho;
  return a * (1.0 + cosine_holder_constant(gamma) * std::pow(w.wavenumber, gamma));
}

double l1_c0_norm(const FieldSpec& spec, int n_lo, int n_hi, int time_nodes, int space_samples) {
  const ScaleSchedule& s = spec.schedule();
  if (n_lo > n_hi) throw std::invalid_argument("l1_c0_norm: empty scale range");
  if (space_samples < 16) throw std::invalid_argument("l1_c0_norm: need at least 16 spatial samples");
  const GaussRule& rule = gauss_rule(time_nodes);
  std::vector<double> profile(rule.nodes.size());
  for (std::size_t q = 0; q < profile.size(); ++q) profile[q] = spec.bump()(rule.nodes[q]);

  double total = 0.0;
  for (int n = n_lo; n <= n_hi; ++n) {
    const std::int64_t count = s.blocks(n);
    double scale_sum = 0.0;
    for (std::int64_t j = 0; j < count; ++j) {
      const BlockWindow w = block_window(spec, n, j);
      // Sampled sup over one period of the read coordinate.
      double peak = 0.0;
      for (int i = 0; i < space_samples; ++i) {
        const double x = (kTwoPi / w.wavenumber) * i / space_samples;
        peak = std::max(peak, std::abs(std::sin(w.wavenumber * x + w.params.B)));
      }
      double block = 0.0;
      for (std::size_t q = 0; q < profile.size(); ++q) block += rule.weights[q] * profile[q];
      scale_sum += std::abs(w.amplitude) * peak * block * (w.t_end - w.t_start);
    }
    total += scale_sum;
  }
  return total;
}

}  // namespace shearsep::fields
