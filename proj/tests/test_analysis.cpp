#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "doctest.h"
#include "shearsep/analysis.hpp"
#include "shearsep/rng.hpp"

using namespace shearsep;
using namespace shearsep::analysis;

TEST_SUITE("analysis") {
  TEST_CASE("bound formulas") {
    CHECK(bound_value(SingleScale{1.0, 1e6}) == doctest::Approx(0.642));
    CHECK(bound_value(SingleScale{0.0, 1e6}) == doctest::Approx(0.64));
    CHECK(bound_value(MultiURho{0.25, 320}) == doctest::Approx(3.0));
    CHECK(bound_value(RescaledURho{0.25, 64}) == doctest::Approx(64.0 * std::exp2(-2.0)));
    CHECK(bound_value(RescaledVAlpha{64}) == doctest::Approx(64.0 * std::exp2(-4.0)));
    CHECK(bound_value(MultiVAlpha{256}) == doctest::Approx(512.0 * std::exp2(-4.0)));
    CHECK_THROWS_AS(bound_value(RescaledURho{0.5, 10}), std::invalid_argument);
    CHECK_THROWS_AS(bound_value(SingleScale{-1.0, 10}), std::invalid_argument);
  }

  TEST_CASE("bounds are nonincreasing in the scale parameter") {
    for (double x = 1; x < 2000; x *= 1.3) {
      const double y = x * 1.3;
      CHECK(bound_value(SingleScale{2.0, y}) <= bound_value(SingleScale{2.0, x}));
      CHECK(bound_value(RescaledURho{0.2, y}) <= bound_value(RescaledURho{0.2, x}));
      CHECK(bound_value(RescaledVAlpha{y}) <= bound_value(RescaledVAlpha{x}));
      CHECK(bound_value(MultiURho{0.2, y}) <= bound_value(MultiURho{0.2, x}));
      CHECK(bound_value(MultiVAlpha{y}) <= bound_value(MultiVAlpha{x}));
    }
  }

  TEST_CASE("scale thresholds") {
    CHECK(threshold_n(ThresholdURho{0.25, 1.0}) == 128);
    CHECK(threshold_n(ThresholdVAlpha{0.0, 1.0, 1.0}) == 64);
    CHECK(threshold_n(ThresholdURho{0.25, 0.01}) == 128);
    CHECK(threshold_n(ThresholdURho{0.25, 4.0}) == 128 + 64);
    CHECK(threshold_n(ThresholdVAlpha{0.0, 1.0, 0.001}) == 64);
    CHECK_THROWS_AS(threshold_n(ThresholdVAlpha{0.25, 0.6, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(threshold_n(ThresholdURho{0.25, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(threshold_n(SingleScale{1.0, 10}), std::invalid_argument);
    CHECK(urho_holder_exponent(0.25) == doctest::Approx((1.0 + 0.25 / 8) / (2.0 + 0.25 / 2)));
  }

  TEST_CASE("bound table rows") {
    const BoundRow r = bound_row(MultiURho{0.25, 320});
    CHECK(r.raw == doctest::Approx(3.0));
    CHECK(r.clamped == 1.0);
    CHECK(r.vacuous);
    const BoundRow q = bound_row(SingleScale{1.0, 1e6});
    CHECK_FALSE(q.vacuous);
    std::ostringstream os;
    const std::vector<BoundRow> rows{r, q};
    write_bound_table(os, rows);
    CHECK(os.str().rfind("kind,params,raw_bound,clamped,vacuous\n", 0) == 0);
  }

  TEST_CASE("ks statistic equals the brute-force double loop") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      std::vector<double> xs;
      const std::size_t n = 2 + seed * 33;
      for (std::size_t i = 0; i < n; ++i) {
        const auto [u, v] = rng::normal_pair(seed, rng::Domain::Noise, i);
        // Round to create ties.
        xs.push_back(seed % 3 == 0 ? std::round(4.0 * u) / 4.0 : u + 0.1 * v);
      }
      const EmpiricalDistribution e(xs);
      CHECK(ks_statistic(e, normal_cdf) == ks_statistic_bruteforce(xs, normal_cdf));
      const Cdf uni = uniform_cdf(-3.0, 3.0);
      CHECK(ks_statistic(e, uni) == ks_statistic_bruteforce(xs, uni));
    }
  }

  TEST_CASE("ks statistic examples") {
    std::vector<double> xs;
    for (std::uint64_t i = 0; i < 10000; ++i) xs.push_back(rng::normal_pair(11, rng::Domain::Noise, i)[0]);
    CHECK(ks_statistic(EmpiricalDistribution(xs), normal_cdf) <= 0.02);
    CHECK(ks_statistic(EmpiricalDistribution(std::vector<double>(50, 0.3)), normal_cdf) >= 0.5);
    CHECK_THROWS_AS(EmpiricalDistribution(std::vector<double>{}), std::invalid_argument);
    CHECK(ks_critical_value(10000) == doctest::Approx(0.01628));
  }

  TEST_CASE("two-sample ks") {
    const EmpiricalDistribution a(std::vector<double>{1, 2, 3, 4});
    const EmpiricalDistribution b(std::vector<double>{3, 4, 5, 6});
    CHECK(ks_two_sample(a, b) == doctest::Approx(0.5));
    CHECK(ks_two_sample(a, a) == 0.0);
  }

  TEST_CASE("mann-kendall") {
    const std::vector<double> up{1, 2, 3, 4, 5, 6, 7, 8};
    const TrendTest t = mann_kendall(up);
    CHECK(t.S == 28.0);
    CHECK(t.variance == doctest::Approx(8.0 * 7.0 * 21.0 / 18.0));
    CHECK(t.significant_increase);
    CHECK_FALSE(t.significant_decrease);
    const std::vector<double> down{5, 4, 3, 2, 1};
    CHECK(mann_kendall(down).significant_decrease);
    CHECK(mann_kendall(down).S == -10.0);
    // Ties: one tied pair of size 2.
    const std::vector<double> tied{1, 1, 2, 3};
    const TrendTest tt = mann_kendall(tied);
    CHECK(tt.S == 5.0);
    CHECK(tt.variance == doctest::Approx((4.0 * 3.0 * 13.0 - 2.0 * 1.0 * 9.0) / 18.0));
    const std::vector<double> flat{2, 2, 2};
    CHECK_FALSE(mann_kendall(flat).significant_increase);
    CHECK_THROWS(mann_kendall(std::vector<double>{1, 2}));
  }

  TEST_CASE("half shift") {
    CHECK(half_shift(0.0) == 0.5);
    CHECK(half_shift(0.25) == 0.75);
    CHECK(half_shift(0.5) == 0.0);
    CHECK(half_shift(0.75) == 0.25);
  }

  TEST_CASE("coupling of two equal atoms is the antidiagonal") {
    const EmpiricalDistribution mu(std::vector<double>{0.0, 1.0});
    const CouplingResult c = quantile_coupling(mu);
    CHECK(c.diagonal_mass == 0.0);
    CHECK_FALSE(c.atom_violation);
    std::size_t lo_hi = 0;
    std::size_t hi_lo = 0;
    for (const auto& [a, b] : c.pairs) {
      lo_hi += a == 0.0 && b == 1.0;
      hi_lo += a == 1.0 && b == 0.0;
    }
    CHECK(lo_hi == c.pairs.size() / 2);
    CHECK(hi_lo == c.pairs.size() / 2);
    CHECK(marginals_exact(mu, c));
  }

  TEST_CASE("coupling of a single atom flags the violation") {
    const EmpiricalDistribution mu(std::vector<double>{0.0, 0.0, 0.0});
    const CouplingResult c = quantile_coupling(mu);
    CHECK(c.atom_violation);
    CHECK(c.diagonal_mass == 1.0);
    for (const auto& [a, b] : c.pairs) CHECK((a == 0.0 && b == 0.0));
  }

  TEST_CASE("coupling of the uniform grid, checked by enumeration") {
    std::vector<double> v;
    for (int k = 0; k < 100; ++k) v.push_back(k / 100.0);
    const EmpiricalDistribution mu(v);
    for (std::size_t mult : {1u, 3u}) {
      const CouplingResult c = quantile_coupling(mu, mult);
      std::map<double, int> first;
      std::map<double, int> second;
      for (const auto& [a, b] : c.pairs) {
        CHECK(a != b);
        ++first[a];
        ++second[b];
      }
      CHECK(first.size() == 100);
      CHECK(second.size() == 100);
      for (const auto& [x, k] : first) CHECK(k == static_cast<int>(c.pairs.size() / 100));
      for (const auto& [x, k] : second) CHECK(k == static_cast<int>(c.pairs.size() / 100));
      CHECK(c.diagonal_mass == 0.0);
      CHECK(marginals_exact(mu, c));
    }
  }

  TEST_CASE("coupling with atoms at the one-half boundary and below") {
    const EmpiricalDistribution mu(std::vector<double>{2.0, 2.0, 2.0, 5.0, 7.0, 9.0});
    const CouplingResult c = quantile_coupling(mu);
    CHECK_FALSE(c.atom_violation);
    CHECK(c.diagonal_mass == 0.0);
    CHECK(marginals_exact(mu, c));
    const EmpiricalDistribution heavy(std::vector<double>{2.0, 2.0, 2.0, 5.0});
    CHECK(quantile_coupling(heavy).atom_violation);
    CHECK(quantile_coupling(heavy).diagonal_mass > 0.0);
  }

  TEST_CASE("log-log slope") {
    const std::vector<double> x{1, 10, 100, 1000};
    std::vector<double> y;
    for (double v : x) y.push_back(3.0 * std::pow(v, -0.5));
    const Estimate e = loglog_slope(x, y);
    CHECK(e.value == doctest::Approx(-0.5));
    CHECK(e.se == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS(loglog_slope(std::vector<double>{1}, std::vector<double>{1}));
    const std::vector<double> a{1, 2, 3, 4};
    const std::vector<double> b{2, 4, 6, 8};
    CHECK(sample_correlation(a, b) == doctest::Approx(1.0));
  }
}
