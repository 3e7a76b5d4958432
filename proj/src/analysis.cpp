#include "shearsep/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace shearsep::analysis {

namespace {

void check_rho(double rho) {
  if (!(rho > 0.0 && rho < 0.5)) throw std::invalid_argument(fmt::format("rho={} outside (0, 1/2)", rho));
}

void check_scale(double n) {
  if (!(n >= 1.0) || !std::isfinite(n)) throw std::invalid_argument(fmt::format("scale n={} must be >= 1", n));
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

long ceil_int(double x) { return static_cast<long>(std::ceil(x - 1e-9)); }

}  // namespace

double urho_holder_exponent(double rho) {
  check_rho(rho);
  return (1.0 + rho / 8.0) / (2.0 + rho / 2.0);
}

double bound_value(const BoundKind& kind) {
  return std::visit(
      Overloaded{
          [](const SingleScale& b) {
            if (!(b.L >= 0.0)) throw std::invalid_argument("SingleScale: L must be >= 0");
            if (!(b.N >= 1.0)) throw std::invalid_argument("SingleScale: N must be >= 1");
            return (2.0 * b.L + 640.0) / std::sqrt(b.N);
          },
          [](const RescaledURho& b) {
            check_rho(b.rho);
            check_scale(b.n);
            return 64.0 * std::exp2(-b.rho * b.n / 8.0);
          },
          [](const RescaledVAlpha& b) {
            check_scale(b.n);
            return 64.0 * std::exp2(-std::sqrt(b.n) / 2.0);
          },
          [](const MultiURho& b) {
            check_rho(b.rho);
            check_scale(b.n);
            return 768.0 / b.rho * std::exp2(-b.rho * b.n / 8.0);
          },
          [](const MultiVAlpha& b) {
            check_scale(b.n);
            return 512.0 * std::exp2(-std::sqrt(b.n) / 4.0);
          },
          [](const ThresholdURho&) -> double { throw std::invalid_argument("bound_value: threshold kind"); },
          [](const ThresholdVAlpha&) -> double { throw std::invalid_argument("bound_value: threshold kind"); },
      },
      kind);
}

long threshold_n(const BoundKind& kind) {
  if (const auto* t = std::get_if<ThresholdURho>(&kind)) {
    check_rho(t->rho);
    if (!(t->norm > 0.0)) throw std::invalid_argument("threshold_n: norm must be > 0");
    // A norm below one shrinks the log term only down to the constant floor.
    return ceil_int(32.0 / t->rho + 8.0 / t->rho * std::max(std::log2(t->norm), 0.0));
  }
  if (const auto* t = std::get_if<ThresholdVAlpha>(&kind)) {
    if (!(t->alpha < 0.5)) throw std::invalid_argument("threshold_n: alpha must be < 1/2");
    if (!(t->norm > 0.0)) throw std::invalid_argument("threshold_n: norm must be > 0");
    const double lo = 1.0 / (2.0 * (1.0 - t->alpha));
    if (!(t->beta > lo && t->beta <= 1.0)) {
      throw std::invalid_argument(fmt::format("threshold_n: beta={} outside ({}, 1]", t->beta, lo));
    }
    const double d = 2.0 * t->beta * (1.0 - t->alpha) - 1.0;
    const double a = std::pow(4.0 * t->beta / d, 2.0);
    const double b = (8.0 + 2.0 * std::log2(t->norm)) / d;
    return ceil_int(std::max({a, b, 64.0}));
  }
  throw std::invalid_argument("threshold_n: not a threshold kind");
}

std::string kind_label(const BoundKind& kind) {
  static const char* names[] = {"single_scale",    "rescaled_u_rho", "rescaled_v_alpha", "multi_u_rho",
                                "multi_v_alpha",   "threshold_u_rho", "threshold_v_alpha"};
  return names[kind.index()];
}

std::string param_label(const BoundKind& kind) {
  return std::visit(
      Overloaded{
          [](const SingleScale& b) { return fmt::format("L={};N={}", b.L, b.N); },
          [](const RescaledURho& b) { return fmt::format("rho={};n={}", b.rho, b.n); },
          [](const RescaledVAlpha& b) { return fmt::format("n={}", b.n); },
          [](const MultiURho& b) { return fmt::format("rho={};n={}", b.rho, b.n); },
          [](const MultiVAlpha& b) { return fmt::format("n={}", b.n); },
          [](const ThresholdURho& b) { return fmt::format("rho={};norm={}", b.rho, b.norm); },
          [](const ThresholdVAlpha& b) { return fmt::format("alpha={};beta={};norm={}", b.alpha, b.beta, b.norm); },
      },
      kind);
}

BoundRow bound_row(const BoundKind& kind) {
  BoundRow row;
  row.kind = kind_label(kind);
  row.params = param_label(kind);
  row.raw = bound_value(kind);
  row.clamped = std::min(row.raw, 1.0);
  row.vacuous = row.raw >= 1.0;
  return row;
}

void write_bound_table(std::ostream& os, std::span<const BoundRow> rows) {
  os << "kind,params,raw_bound,clamped,vacuous\n";
  for (const BoundRow& r : rows) {
    os << fmt::format("{},{},{:.17g},{:.17g},{}\n", r.kind, r.params, r.raw, r.clamped, r.vacuous ? "true" : "false");
  }
}

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> samples) : values_(std::move(samples)) {
  if (values_.empty()) throw std::invalid_argument("EmpiricalDistribution: no samples");
  for (const double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("EmpiricalDistribution: non-finite sample");
  }
  std::sort(values_.begin(), values_.end());
}

double EmpiricalDistribution::max_atom() const {
  std::size_t best = 0;
  for (std::size_t i = 0; i < values_.size();) {
    std::size_t k = i;
    while (k < values_.size() && values_[k] == values_[i]) ++k;
    best = std::max(best, k - i);
    i = k;
  }
  return static_cast<double>(best) / static_cast<double>(values_.size());
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

Cdf uniform_cdf(double lo, double hi) {
  if (!(hi > lo)) throw std::invalid_argument("uniform_cdf: empty interval");
  return [lo, hi](double x) { return std::clamp((x - lo) / (hi - lo), 0.0, 1.0); };
}

double ks_statistic(const EmpiricalDistribution& sample, const Cdf& cdf) {
  const auto v = sample.values();
  const std::size_t n = v.size();
  if (n < 2) throw std::invalid_argument("ks_statistic: need at least two samples");
  const double dn = static_cast<double>(n);
  double d = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t k = i;
    while (k < n && v[k] == v[i]) ++k;
    // Below the tie group the ECDF is i/n, at it k/n.
    const double f = cdf(v[i]);
    d = std::max({d, std::abs(static_cast<double>(k) / dn - f), std::abs(static_cast<double>(i) / dn - f)});
    i = k;
  }
  return d;
}

double ks_statistic_bruteforce(std::span<const double> samples, const Cdf& cdf) {
  const std::size_t n = samples.size();
  if (n < 2) throw std::invalid_argument("ks_statistic: need at least two samples");
  const double dn = static_cast<double>(n);
  double d = 0.0;
  for (const double x : samples) {
    std::size_t le = 0;
    std::size_t lt = 0;
    for (const double y : samples) {
      le += y <= x;
      lt += y < x;
    }
    const double f = cdf(x);
    d = std::max({d, std::abs(static_cast<double>(le) / dn - f), std::abs(static_cast<double>(lt) / dn - f)});
  }
  return d;
}

double ks_two_sample(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
  const auto x = a.values();
  const auto y = b.values();
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= t) ++i;
    while (j < y.size() && y[j] <= t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical_value(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

double ks_two_sample_critical_value(std::size_t n, std::size_t m) {
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  return 1.628 * std::sqrt((dn + dm) / (dn * dm));
}

TrendTest mann_kendall(std::span<const double> series, double alpha) {
  const std::size_t n = series.size();
  if (n < 3) throw std::invalid_argument("mann_kendall: need at least three points");
  if (!(alpha > 0.0 && alpha < 0.5)) throw std::invalid_argument("mann_kendall: alpha must lie in (0, 1/2)");
  TrendTest t;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      t.S += (series[j] > series[i]) - (series[j] < series[i]);
    }
  }
  std::map<double, double> ties;
  for (const double v : series) ties[v] += 1.0;
  const double dn = static_cast<double>(n);
  double var = dn * (dn - 1.0) * (2.0 * dn + 5.0);
  for (const auto& [value, c] : ties) var -= c * (c - 1.0) * (2.0 * c + 5.0);
  t.variance = var / 18.0;
  if (t.variance > 0.0) {
    const double sd = std::sqrt(t.variance);
    if (t.S > 0) t.z = (t.S - 1.0) / sd;
    if (t.S < 0) t.z = (t.S + 1.0) / sd;
  }
  // One-sided normal quantile by bisection on the CDF.
  double lo = 0.0;
  double hi = 10.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < 1.0 - alpha ? lo : hi) = mid;
  }
  t.significant_increase = t.z > hi;
  t.significant_decrease = t.z < -hi;
  return t;
}

double half_shift(double z) {
  const double s = z + 0.5;
  return s >= 1.0 ? s - 1.0 : s;
}

CouplingResult quantile_coupling(const EmpiricalDistribution& mu, std::size_t multiplier) {
  if (multiplier < 1) throw std::invalid_argument("quantile_coupling: multiplier must be >= 1");
  const auto v = mu.values();
  const std::size_t n = v.size();
  CouplingResult out;
  out.offset = v.front();
  out.scale = v.back() > v.front() ? v.back() - v.front() : 1.0;
  out.grid = 2 * n * multiplier;
  out.atom_violation = mu.max_atom() > 0.5;

  // z_i = (2i+1)/(2G) lies in atom k (1-based) iff k = ceil(z_i n); with
  // G = 2 n m this is ceil((2i+1) / (4m)), exact in integers.
  const std::size_t G = out.grid;
  const std::size_t four_m = 4 * multiplier;
  auto quantile_index = [&](std::size_t i) { return (2 * i + 1 + four_m - 1) / four_m - 1; };
  out.pairs.reserve(G);
  std::size_t diagonal = 0;
  for (std::size_t i = 0; i < G; ++i) {
    const std::size_t shifted = (i + G / 2) % G;  // half_shift on the grid
    const double a = v[quantile_index(i)];
    const double b = v[quantile_index(shifted)];
    diagonal += a == b;
    out.pairs.emplace_back(a, b);
  }
  out.diagonal_mass = static_cast<double>(diagonal) / static_cast<double>(G);
  return out;
}

bool marginals_exact(const EmpiricalDistribution& mu, const CouplingResult& c) {
  std::map<double, std::size_t> target;
  for (const double x : mu.values()) ++target[x];
  std::map<double, std::size_t> first;
  std::map<double, std::size_t> second;
  for (const auto& [a, b] : c.pairs) {
    ++first[a];
    ++second[b];
  }
  const std::size_t per_atom = c.grid / mu.size();
  if (per_atom * mu.size() != c.grid) return false;
  for (const auto& [x, count] : target) {
    if (first[x] != count * per_atom || second[x] != count * per_atom) return false;
  }
  return first.size() == target.size() && second.size() == target.size();
}

Estimate loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need matching series of >= 2");
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw std::invalid_argument("loglog_slope: values must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("loglog_slope: x values are all equal");
  Estimate e;
  e.value = sxy / sxx;
  if (n > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = ly[i] - my - e.value * (lx[i] - mx);
      rss += r * r;
    }
    e.se = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  }
  return e;
}

double sample_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("sample_correlation: size mismatch");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace shearsep::analysis
