#include "shearsep/noise.hpp"

#include <algorithm>
#include <charconv>
#include <fmt/format.h>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "shearsep/rng.hpp"

namespace shearsep::noise {

NoisePath::NoisePath(double t0, double dt, std::vector<Vec2> values)
    : t0_(t0), dt_(dt), values_(std::move(values)) {
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw std::invalid_argument("NoisePath: dt must be > 0");
  if (values_.size() < 2) throw std::invalid_argument("NoisePath: need at least two nodes");
}

bool NoisePath::covers(double t) const {
  const double tol = 1e-9 * dt_;
  return t >= t0_ - tol && t <= t_end() + tol;
}

std::size_t NoisePath::cell_of(double t) const {
  const double u = (t - t0_) / dt_;
  const std::size_t last = values_.size() - 2;
  if (u <= 0.0) return 0;
  const auto i = static_cast<std::size_t>(u);
  return std::min(i, last);
}

Vec2 NoisePath::at(double t) const {
  if (!covers(t)) {
    throw std::out_of_range(fmt::format("NoisePath: t={} outside [{}, {}]", t, t0_, t_end()));
  }
  const std::size_t i = cell_of(t);
  const double frac = std::clamp((t - time(i)) / dt_, 0.0, 1.0);
  const Vec2& a = values_[i];
  const Vec2& b = values_[i + 1];
  return {a.x1 + frac * (b.x1 - a.x1), a.x2 + frac * (b.x2 - a.x2)};
}

NoisePath NoisePath::rescaled(double origin, double rate, Vec2 scale) const {
  std::vector<Vec2> v(values_.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = {scale.x1 * values_[i].x1, scale.x2 * values_[i].x2};
  }
  return NoisePath((t0_ - origin) * rate, dt_ * rate, std::move(v));
}

NoisePath NoisePath::scaled(double factor) const {
  std::vector<Vec2> v(values_);
  for (auto& p : v) p = factor * p;
  return NoisePath(t0_, dt_, std::move(v));
}

void validate(const NoiseKind& kind) {
  if (const auto* f = std::get_if<FractionalBrownian>(&kind)) {
    if (!(f->hurst > 0.0 && f->hurst < 1.0)) {
      throw std::invalid_argument("fractional Brownian motion needs hurst in (0,1)");
    }
  }
  if (const auto* h = std::get_if<DeterministicHolder>(&kind)) {
    if (!(h->beta > 0.0 && h->beta <= 1.0)) {
      throw std::invalid_argument("deterministic Holder path needs beta in (0,1]");
    }
  }
}

std::string name_of(const NoiseKind& kind) {
  struct Visitor {
    std::string operator()(const Brownian&) const { return "brownian"; }
    std::string operator()(const FractionalBrownian&) const { return "fbm"; }
    std::string operator()(const ZeroNoise&) const { return "zero"; }
    std::string operator()(const DeterministicHolder&) const { return "holder"; }
  };
  return std::visit(Visitor{}, kind);
}

NoisePath sample_brownian(std::uint64_t seed, double t0, double dt, std::size_t n) {
  if (n < 2) throw std::invalid_argument("sample_brownian: n must be >= 2");
  if (!(dt > 0.0)) throw std::invalid_argument("sample_brownian: dt must be > 0");
  std::vector<Vec2> v(n);
  const double sd = std::sqrt(dt);
  Vec2 w{};
  for (std::size_t i = 1; i < n; ++i) {
    const auto [z1, z2] = rng::normal_pair(seed, rng::Domain::Noise, i - 1);
    w.x1 += sd * z1;
    w.x2 += sd * z2;
    v[i] = w;
  }
  return NoisePath(t0, dt, std::move(v));
}

NoisePath sample(const NoiseKind& kind, std::uint64_t seed, double t0, double dt, std::size_t n,
                 double amplitude) {
  validate(kind);
  if (n < 2) throw std::invalid_argument("sample: n must be >= 2");
  if (!(dt > 0.0)) throw std::invalid_argument("sample: dt must be > 0");
  NoisePath path = std::visit(
      [&](const auto& k) -> NoisePath {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Brownian>) {
          return sample_brownian(seed, t0, dt, n);
        } else if constexpr (std::is_same_v<K, FractionalBrownian>) {
          return sample_fbm(seed, k.hurst, t0, dt, n);
        } else if constexpr (std::is_same_v<K, ZeroNoise>) {
          return NoisePath(t0, dt, std::vector<Vec2>(n));
        } else {
          std::vector<Vec2> v(n);
          for (std::size_t i = 0; i < n; ++i) {
            v[i] = {k.amplitude * std::pow(static_cast<double>(i) * dt, k.beta), 0.0};
          }
          return NoisePath(t0, dt, std::move(v));
        }
      },
      kind);
  if (amplitude != 1.0 && !std::holds_alternative<DeterministicHolder>(kind)) {
    return path.scaled(amplitude);
  }
  return path;
}

namespace {

struct Range {
  std::size_t first;
  std::size_t last;  // inclusive
};

Range window_nodes(const NoisePath& path, std::optional<TimeWindow> window) {
  if (!window) return {0, path.size() - 1};
  if (!(window->end > window->start)) throw std::invalid_argument("holder_seminorm: empty window");
  if (!path.covers(window->start) || !path.covers(window->end)) {
    throw std::invalid_argument("holder_seminorm: window outside the path span");
  }
  const double tol = 1e-9;
  const auto first = static_cast<std::size_t>(
      std::max(0.0, std::ceil((window->start - path.t0()) / path.dt() - tol)));
  const auto last = std::min(
      path.size() - 1,
      static_cast<std::size_t>(std::floor((window->end - path.t0()) / path.dt() + tol)));
  if (last <= first) throw std::invalid_argument("holder_seminorm: window holds fewer than two nodes");
  return {first, last};
}

void check_beta(double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("holder_seminorm: beta must lie in (0,1]");
}

inline double pair_ratio(const Vec2& a, const Vec2& b, double denom) {
  const double d1 = a.x1 - b.x1;
  const double d2 = a.x2 - b.x2;
  return std::sqrt(d1 * d1 + d2 * d2) / denom;
}

}  // namespace

double holder_seminorm_serial(const NoisePath& path, double beta, std::optional<TimeWindow> window) {
  check_beta(beta);
  const Range r = window_nodes(path, window);
  const auto v = path.values();
  double best = 0.0;
  for (std::size_t i = r.first; i <= r.last; ++i) {
    for (std::size_t j = i + 1; j <= r.last; ++j) {
      const double denom = std::pow(static_cast<double>(j - i) * path.dt(), beta);
      best = std::max(best, pair_ratio(v[i], v[j], denom));
    }
  }
  return best;
}

double holder_seminorm(const NoisePath& path, double beta, std::optional<TimeWindow> window) {
  check_beta(beta);
  const Range r = window_nodes(path, window);
  const auto v = path.values();
  const std::size_t m = r.last - r.first;  // largest lag

  Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Vec2 hi{-lo.x1, -lo.x2};
  for (std::size_t i = r.first; i <= r.last; ++i) {
    lo = {std::min(lo.x1, v[i].x1), std::min(lo.x2, v[i].x2)};
    hi = {std::max(hi.x1, v[i].x1), std::max(hi.x2, v[i].x2)};
  }
  const double diameter = std::hypot(hi.x1 - lo.x1, hi.x2 - lo.x2) * (1.0 + 1e-12);

  // Lags are scanned in ascending chunks; once no pair at the next lag can
  // beat the running maximum, longer lags cannot either.
  constexpr std::size_t kChunk = 64;
  double best = 0.0;
  for (std::size_t lag0 = 1; lag0 <= m; lag0 += kChunk) {
    const double bound = diameter / std::pow(static_cast<double>(lag0) * path.dt(), beta);
    if (bound <= best) break;
    const std::size_t lag1 = std::min(m, lag0 + kChunk - 1);
    double chunk_best = best;
#pragma omp parallel for schedule(dynamic, 1) reduction(max : chunk_best)
    for (std::size_t lag = lag0; lag <= lag1; ++lag) {
      const double denom = std::pow(static_cast<double>(lag) * path.dt(), beta);
      double local = 0.0;
      for (std::size_t i = r.first; i + lag <= r.last; ++i) {
        local = std::max(local, pair_ratio(v[i], v[i + lag], denom));
      }
      chunk_best = std::max(chunk_best, local);
    }
    best = chunk_best;
  }
  return best;
}

double oscillation(const NoisePath& path, int axis, double a, double b) {
  if (!(b >= a)) throw std::invalid_argument("oscillation: empty interval");
  double lo = path.at(a)[axis];
  double hi = lo;
  const double end = path.at(b)[axis];
  lo = std::min(lo, end);
  hi = std::max(hi, end);
  const double u0 = (a - path.t0()) / path.dt();
  const double u1 = (b - path.t0()) / path.dt();
  const auto first = static_cast<std::size_t>(std::max(0.0, std::ceil(u0)));
  const auto last = std::min(path.size() - 1, static_cast<std::size_t>(std::max(0.0, std::floor(u1))));
  const auto v = path.values();
  for (std::size_t i = first; i <= last && i < path.size(); ++i) {
    lo = std::min(lo, v[i][axis]);
    hi = std::max(hi, v[i][axis]);
  }
  return hi - lo;
}

bool fluctuation_check(const NoisePath& path, std::size_t blocks) {
  if (!path.covers(0.0) || !path.covers(static_cast<double>(blocks))) {
    throw std::invalid_argument("fluctuation_check: path does not span [0, N]");
  }
  for (std::size_t n = 0; n < blocks; ++n) {
    const double a = static_cast<double>(n);
    if (oscillation(path, 1, a, a + 1.0) > kFluctuationLimit) return false;
  }
  return true;
}

void write_csv(std::ostream& os, const NoisePath& path) {
  os << "t,w1,w2\n";
  const auto v = path.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    os << fmt::format("{:.17g},{:.17g},{:.17g}\n", path.time(i), v[i].x1, v[i].x2);
  }
}

namespace {

double parse_double(std::string_view s) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::invalid_argument("read_csv: bad number '" + std::string(s) + "'");
  }
  return x;
}

}  // namespace

NoisePath read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "t,w1,w2") {
    throw std::invalid_argument("read_csv: expected header t,w1,w2");
  }
  std::vector<double> times;
  std::vector<Vec2> values;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw std::invalid_argument("read_csv: malformed row '" + line + "'");
    }
    const std::string_view sv(line);
    times.push_back(parse_double(sv.substr(0, c1)));
    values.push_back({parse_double(sv.substr(c1 + 1, c2 - c1 - 1)), parse_double(sv.substr(c2 + 1))});
  }
  if (values.size() < 2) throw std::invalid_argument("read_csv: need at least two rows");
  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::abs(times[i] - (times.front() + static_cast<double>(i) * dt)) > 1e-9 * std::max(1.0, dt)) {
      throw std::invalid_argument("read_csv: grid is not uniform");
    }
  }
  return NoisePath(times.front(), dt, std::move(values));
}

}  // namespace shearsep::noise
