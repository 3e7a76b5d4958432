#include <sstream>

#include "doctest.h"
#include "shearsep/analysis.hpp"
#include "shearsep/rng.hpp"
#include "shearsep/twopoint.hpp"
#include "support.hpp"

using namespace shearsep;
using fields::FieldSpec;
using twopoint::PairState;

namespace {

double G(double c) { return c == 0.0 ? 1.5 : (std::sin(2.0 * c) - std::sin(0.5 * c)) / c; }

twopoint::HitOptions overriding() {
  twopoint::HitOptions o;
  o.override_preconditions = true;
  return o;
}

}  // namespace

TEST_SUITE("twopoint") {
  TEST_CASE("inner cosine integral") {
    for (double c : {0.0, 1e-6, 1e-4, 0.3, 1.0, 4.0, -2.5}) {
      // Midpoint rule oracle for int_{1/2}^{2} cos(y c) dy.
      double s = 0.0;
      const int m = 200000;
      for (int i = 0; i < m; ++i) s += std::cos((0.5 + 1.5 * (i + 0.5) / m) * c);
      CHECK(twopoint::cos_integral(c) == doctest::Approx(s * 1.5 / m).epsilon(1e-9));
      CHECK(twopoint::cos_integral(c) == doctest::Approx(G(c)).epsilon(1e-9));
    }
  }

  TEST_CASE("second moment with zero noise has a closed form") {
    // With w = 0 the double integral collapses to 1 - (2/3) G(a - b).
    const auto w = testing::zero_path(0.0, 1.0, 1.0 / 8);
    CHECK(twopoint::moment_d2(0.0, w) == doctest::Approx(0.0).epsilon(1e-14));
    for (double d : {0.5, 1.0, 4.0, 10.0, 100.0}) {
      CHECK(twopoint::moment_d2(d, w, 32) == doctest::Approx(1.0 - (2.0 / 3.0) * G(d)).epsilon(1e-10));
    }
    CHECK(twopoint::moment_d2(4.0, w) >= 0.5);
    // Large separation: tends to 1 with remainder at most 4 / (3 |a - b|).
    for (double d : {50.0, 500.0, 5000.0}) CHECK(std::abs(twopoint::moment_d2(d, w) - 1.0) <= 4.0 / (3.0 * d));
  }

  TEST_CASE("second moment with a frozen noise path, against a direct double sum") {
    const auto W = testing::brownian_path(6, 0.0, 3.0, 1.0 / 4, 0.05);
    const fields::BumpProfile phi;
    const int m = 600;
    for (double t0 : {0.0, 1.0, 2.0}) {
      double s = 0.0;
      for (int i = 0; i < m; ++i) {
        const double r = (i + 0.5) / m;
        for (int k = 0; k < m; ++k) {
          const double u = (k + 0.5) / m;
          const double dw = W.at(t0 + u).x2 - W.at(t0 + r).x2;
          s += phi(r) * phi(u) * (G(dw) - G(4.0 + dw));
        }
      }
      const double oracle = (2.0 / 3.0) * s / (double(m) * m);
      CHECK(twopoint::moment_d2_window(4.0, W, t0, phi, 16) == doctest::Approx(oracle).epsilon(1e-5));
    }
  }

  TEST_CASE("hits vanish for equal read coordinates") {
    const FieldSpec spec = FieldSpec::unit(Direction::E1, 3, 20);
    const auto W = testing::brownian_path(3, 0.0, 20.0, 1.0 / 8, 0.01);
    const auto h = twopoint::extract_hits(spec, W, {0.0, 1.0}, {2.0, 1.0}, 20, overriding());
    for (double d : h.hits) CHECK(d == 0.0);
    CHECK(h.r_end == doctest::Approx(h.r_start).epsilon(1e-14));
  }

  TEST_CASE("hits are consistent with the separation and surely bounded") {
    const auto W = testing::brownian_path(8, 0.0, 300.0, 1.0 / 8, 0.01);
    REQUIRE(noise::fluctuation_check(W, 300));
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const FieldSpec spec = FieldSpec::unit(Direction::E1, seed, 300);
      const auto h = twopoint::extract_hits(spec, W, {0.5, 0.0}, {0.0, 4.5}, 300);
      REQUIRE(h.hits.size() == 300);
      double sum = 0.0;
      for (double d : h.hits) {
        sum += d;
        CHECK(std::abs(d) <= 2.0);
      }
      CHECK(std::abs(sum - (h.r_end - h.r_start)) <= 1e-10);
      CHECK(twopoint::third_moment_bound_check(h));
      // Same hits by integrating both particles separately.
      const auto a = flow::transport(spec, W, {0.0, {0.5, 0.0}}, 300.0, {});
      const auto b = flow::transport(spec, W, {0.0, {0.0, 4.5}}, 300.0, {});
      CHECK(std::abs((a.x.x1 - b.x.x1) - h.r_end) <= 1e-10);
    }
  }

  TEST_CASE("hit preconditions") {
    const FieldSpec spec = FieldSpec::unit(Direction::E1, 1, 10);
    const auto quiet = testing::zero_path(0.0, 10.0, 0.125);
    CHECK_THROWS_AS(twopoint::extract_hits(spec, quiet, {0, 0}, {0, 3.9}, 10), PreconditionError);
    const auto loud = testing::brownian_path(1, 0.0, 10.0, 0.125, 1.0);
    CHECK_THROWS_AS(twopoint::extract_hits(spec, loud, {0, 0}, {0, 4}, 10), PreconditionError);
    CHECK_NOTHROW(twopoint::extract_hits(spec, loud, {0, 0}, {0, 4}, 10, overriding()));
    CHECK_THROWS_AS(twopoint::extract_hits(spec, quiet, {0, 0}, {0, 4}, 11), std::out_of_range);
    CHECK_THROWS_AS(twopoint::extract_hits(FieldSpec::unit(Direction::E2, 1, 10), quiet, {0, 0}, {0, 4}, 5),
                    std::invalid_argument);
  }

  TEST_CASE("third moment check") {
    twopoint::HitSequence h;
    h.hits.assign(10, 0.0);
    CHECK(twopoint::third_moment_bound_check(h));
    h.hits.assign(10, 2.0);
    CHECK(twopoint::third_absolute_moment(h.hits) == 8.0);
    CHECK(twopoint::third_moment_bound_check(h));
    h.hits[3] = -2.0001;
    CHECK_FALSE(twopoint::third_moment_bound_check(h));
    CHECK_THROWS(twopoint::third_absolute_moment({}));
  }

  TEST_CASE("hit mean is zero and consecutive hits are uncorrelated") {
    const auto W = testing::brownian_path(2, 0.0, 2.0, 1.0 / 8, 0.01);
    std::vector<double> d0;
    std::vector<double> d1;
    testing::Running mean;
    for (std::uint64_t seed = 0; seed < 100000; ++seed) {
      const FieldSpec spec = FieldSpec::unit(Direction::E1, rng::derive_seed(77, rng::kFieldSalt, seed), 2);
      twopoint::HitOptions o;
      o.quadrature_nodes = 8;
      const auto h = twopoint::extract_hits(spec, W, {0, 0}, {0, 4}, 2, o);
      d0.push_back(h.hits[0]);
      d1.push_back(h.hits[1]);
      mean.add(h.hits[0]);
    }
    CHECK(std::abs(mean.mean()) < 4.0 * mean.se());
    CHECK(std::abs(analysis::sample_correlation(d0, d1)) <= 0.01);
  }

  TEST_CASE("pair evolution") {
    const FieldSpec spec = FieldSpec::u_rho(0.25, 14, 1, 4);
    const double end = spec.schedule().end();
    const auto W = testing::brownian_path(14, 0.0, end, 1.0 / 2048, 0.3);
    SUBCASE("coincident particles stay together") {
      const auto r = twopoint::evolve_pair(spec, W, {0.0, {0.2, 0.2}, {0.2, 0.2}}, end, {});
      CHECK(r.state.separation() == Vec2{});
      for (const auto& rec : r.trace.records) CHECK(rec.distance == 0.0);
    }
    SUBCASE("trace covers every scale in descending order") {
      const auto r = twopoint::evolve_pair(spec, W, {0.0, {0.0, 0.0}, {0.1, 0.05}}, end, {});
      REQUIRE(r.trace.records.size() == 5);
      CHECK(r.trace.records.front().n == 4);
      CHECK(r.trace.records.back().n == 0);
      for (std::size_t i = 1; i < r.trace.records.size(); ++i) {
        CHECK(r.trace.records[i].n == r.trace.records[i - 1].n - 1);
        CHECK(r.trace.records[i].time > r.trace.records[i - 1].time);
      }
      CHECK(r.max_read_drift <= 1e-12);
    }
    SUBCASE("zero field keeps the separation") {
      fields::FieldParams p = spec.params();
      p.gain = 0.0;
      const FieldSpec flat(p);
      const auto r = twopoint::evolve_pair(flat, W, {0.0, {0.0, 0.0}, {0.1, 0.05}}, end, {});
      CHECK((r.state.separation() - Vec2{-0.1, -0.05}).norm() < 1e-13);
    }
    SUBCASE("read-axis separation is constant across each scale") {
      const auto r = twopoint::evolve_pair(spec, W, {0.0, {0.0, 0.0}, {0.1, 0.05}}, end, {});
      for (std::size_t i = 1; i < r.trace.records.size(); ++i) {
        const int n = r.trace.records[i - 1].n;  // scale acting between the two records
        const int c = read_axis(spec.schedule().direction(n));
        CHECK(std::abs(r.trace.records[i].separation[c] - r.trace.records[i - 1].separation[c]) <= 1e-13);
      }
    }
  }

  TEST_CASE("csv exports carry run identifiers") {
    twopoint::HitSequence h;
    h.hits = {0.5, -0.25};
    std::ostringstream os;
    twopoint::write_hits_csv(os, h, 42, 0xabcdefull);
    CHECK(os.str().find("# seed 42") != std::string::npos);
    CHECK(os.str().find("# spec hash") != std::string::npos);
  }
}
