#pragma once

// Closed-form probability bounds, scale thresholds, statistical tests and
// the diagonal-free quantile coupling.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace shearsep::analysis {

struct SingleScale {
  double L;
  double N;
};
struct RescaledURho {
  double rho;
  double n;
};
struct RescaledVAlpha {
  double n;
};
struct MultiURho {
  double rho;
  double n;
};
struct MultiVAlpha {
  double n;
};
struct ThresholdURho {
  double rho;
  double norm;
};
struct ThresholdVAlpha {
  double alpha;
  double beta;
  double norm;
};
using BoundKind =
    std::variant<SingleScale, RescaledURho, RescaledVAlpha, MultiURho, MultiVAlpha, ThresholdURho, ThresholdVAlpha>;

/// Probability bound for the separation kinds. May exceed 1.
double bound_value(const BoundKind& kind);
/// Smallest admissible scale for the threshold kinds (rounded up).
long threshold_n(const BoundKind& kind);

/// Hölder exponent of the noise norm entering the u^rho threshold.
double urho_holder_exponent(double rho);
/// Multiplier applied to grid-based noise norms before threshold checks.
inline constexpr double kNormSafetyFactor = 2.0;

std::string kind_label(const BoundKind& kind);
std::string param_label(const BoundKind& kind);

struct BoundRow {
  std::string kind;
  std::string params;
  double raw = 0.0;
  double clamped = 0.0;
  bool vacuous = false;
};
BoundRow bound_row(const BoundKind& kind);
/// CSV `kind,params,raw_bound,clamped,vacuous`.
void write_bound_table(std::ostream& os, std::span<const BoundRow> rows);

/// Sorted sample with uniform weights.
class EmpiricalDistribution {
 public:
  explicit EmpiricalDistribution(std::vector<double> samples);
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double weight() const { return 1.0 / static_cast<double>(values_.size()); }
  /// Largest mass carried by a single value.
  double max_atom() const;

 private:
  std::vector<double> values_;
};

using Cdf = std::function<double(double)>;
double normal_cdf(double x);
Cdf uniform_cdf(double lo, double hi);

/// sup_x |F_n(x) - F(x)| evaluated at the sample points from both sides.
double ks_statistic(const EmpiricalDistribution& sample, const Cdf& cdf);
/// O(n^2) reference for ks_statistic.
double ks_statistic_bruteforce(std::span<const double> samples, const Cdf& cdf);
double ks_two_sample(const EmpiricalDistribution& a, const EmpiricalDistribution& b);
/// Asymptotic critical values (alpha = 0.01).
double ks_critical_value(std::size_t n);
double ks_two_sample_critical_value(std::size_t n, std::size_t m);

struct TrendTest {
  double S = 0.0;
  double variance = 0.0;
  double z = 0.0;
  bool significant_increase = false;
  bool significant_decrease = false;
};
/// Mann-Kendall trend test with tie correction, one-sided at level alpha.
TrendTest mann_kendall(std::span<const double> series, double alpha = 0.05);

/// Shift map z -> z + 1/2 mod 1 used to pair quantiles.
double half_shift(double z);

struct CouplingResult {
  std::vector<std::pair<double, double>> pairs;  // original coordinates
  double offset = 0.0;                           // embedding u = (x - offset) / scale
  double scale = 1.0;
  std::size_t grid = 0;
  double diagonal_mass = 0.0;
  bool atom_violation = false;  // some value carries mass > 1/2
};

/// Pairs (Q(z), Q(half_shift(z))) over the midpoint grid z_i = (2i+1)/(2G),
/// G = 2 n multiplier, where Q is the quantile function of mu on [0,1].
CouplingResult quantile_coupling(const EmpiricalDistribution& mu, std::size_t multiplier = 1);
/// Both coordinates of the pairs reproduce mu exactly.
bool marginals_exact(const EmpiricalDistribution& mu, const CouplingResult& c);

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};
/// Least-squares slope of log y against log x with its standard error.
Estimate loglog_slope(std::span<const double> x, std::span<const double> y);
double sample_correlation(std::span<const double> a, std::span<const double> b);

}  // namespace shearsep::analysis
