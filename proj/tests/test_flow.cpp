#include <sstream>

#include "doctest.h"
#include "shearsep/flow.hpp"
#include "support.hpp"

using namespace shearsep;
using fields::BlockWindow;
using fields::FieldSpec;
using flow::IntegratorConfig;
using flow::ParticleState;

namespace {

IntegratorConfig exact() { return {}; }

IntegratorConfig euler(int substeps) {
  IntegratorConfig c;
  c.method = flow::Method::GenericEuler;
  c.substeps_per_block = substeps;
  return c;
}

double dist(Vec2 a, Vec2 b) { return (a - b).norm(); }

}  // namespace

TEST_SUITE("flow") {
  TEST_CASE("integrator configuration") {
    IntegratorConfig c;
    c.quadrature_nodes = 4;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = euler(8);
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    CHECK_NOTHROW(exact().validate());
  }

  TEST_CASE("zero noise with the bump peaked on the moved coordinate") {
    fields::FieldParams p;
    p.kind = fields::FieldKind::Unit;
    p.blocks = 2;
    p.seed = 3;
    p.pinned_A = 1.0;
    const FieldSpec spec(p);
    const auto W = testing::zero_path(0.0, 2.0, 1.0 / 8);
    const fields::ShearBlock b = fields::shear_params(spec, 0, 0);
    const Vec2 x{0.25, std::numbers::pi / 2 - b.B};
    const ParticleState out = flow::advance_block(spec, W, {0.0, x}, 0, 0, exact());
    CHECK(out.t == 1.0);
    CHECK(out.x.x1 - x.x1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out.x.x2 == x.x2);
  }

  TEST_CASE("zero field is a pure translation by the noise") {
    fields::FieldParams p;
    p.kind = fields::FieldKind::Unit;
    p.blocks = 6;
    p.gain = 0.0;
    const FieldSpec spec(p);
    const auto W = testing::brownian_path(4, 0.0, 6.0, 1.0 / 16);
    const Vec2 y{1.0, -2.0};
    for (const IntegratorConfig& cfg : {exact(), euler(64)}) {
      const auto traj = flow::solve(spec, W, {0.0, y}, 6.0, cfg);
      REQUIRE(traj.size() == 7);
      for (const ParticleState& s : traj) {
        const Vec2 expected = y + W.at(s.t) - W.at(0.0);
        CHECK(dist(s.x, expected) < 1e-13);
      }
    }
  }

  TEST_CASE("solve to the start time is the identity") {
    const FieldSpec spec = FieldSpec::u_rho(0.25, 1, 1, 3);
    const double t0 = fields::boundary_time(spec, {2, 1});
    const auto W = testing::brownian_path(1, 0.0, spec.schedule().end(), 1.0 / 512);
    const auto traj = flow::solve(spec, W, {t0, {0.3, 0.4}}, t0, exact());
    REQUIRE(traj.size() == 1);
    CHECK(traj[0].x == Vec2{0.3, 0.4});
  }

  TEST_CASE("non-sheared coordinate follows the noise exactly") {
    const FieldSpec spec = FieldSpec::u_rho(0.25, 5, 1, 4);
    const auto W = testing::brownian_path(9, 0.0, spec.schedule().end(), 1.0 / 1024, 0.2);
    ParticleState s{0.0, {0.1, -0.3}};
    fields::BlockIndex b = fields::first_block(spec);
    while (!(b == fields::end_block(spec))) {
      const BlockWindow w = fields::block_window(spec, b.n, b.j);
      const int c = read_axis(w.params.direction);
      const ParticleState next = flow::advance_block(spec, W, s, b.n, b.j, exact());
      const double expected = s.x[c] + (W.at(w.t_end)[c] - W.at(w.t_start)[c]);
      CHECK(std::abs(next.x[c] - expected) <= 1e-14 * std::max(1.0, std::abs(expected)));
      s = next;
      b = fields::next_block(spec, b);
    }
  }

  TEST_CASE("factorised shear integral equals node-by-node evaluation") {
    const FieldSpec spec = FieldSpec::unit(Direction::E1, 17, 40);
    const auto W = testing::brownian_path(2, 0.0, 40.0, 1.0 / 8, 0.3);
    for (std::int64_t j = 0; j < 40; ++j) {
      const BlockWindow w = fields::block_window(spec, 0, j);
      const flow::ShearIntegral I = flow::shear_integral(spec.bump(), w, W, 32);
      for (double xc : {-3.0, 0.0, 0.7, 5.5}) {
        const double theta = w.wavenumber * xc + w.params.B;
        const double gain = std::sin(theta) * I.C + std::cos(theta) * I.S;
        CHECK(gain == doctest::Approx(flow::shear_gain_direct(spec.bump(), w, W, 32, xc)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("kernel cache reproduces direct quadrature") {
    const FieldSpec spec = FieldSpec::u_rho(0.25, 8, 1, 4);
    const auto W = testing::brownian_path(3, 0.0, spec.schedule().end(), 1.0 / 2048, 0.5);
    const flow::KernelCache cache(spec, W, 32);
    CHECK(cache.size() == static_cast<std::size_t>(fields::blocks_between(spec, fields::first_block(spec),
                                                                          fields::end_block(spec))));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const FieldSpec s = spec.with_seed(seed);
      for (int n = 1; n <= 4; ++n) {
        const BlockWindow w = fields::block_window(s, n, 0);
        const flow::ShearIntegral a = cache.integral(w);
        const flow::ShearIntegral b = flow::shear_integral(s.bump(), w, W, 32);
        CHECK(std::abs(a.C - b.C) <= 1e-12 * std::max(1.0, std::abs(b.C)) + 1e-13);
        CHECK(std::abs(a.S - b.S) <= 1e-12 * std::max(1.0, std::abs(b.S)) + 1e-13);
        CHECK(cache.increment({n, 0}) == flow::block_increment(w, W));
      }
      const ParticleState start{0.0, {0.2, 0.9}};
      const ParticleState direct = flow::transport(s, W, start, s.schedule().end(), exact());
      const ParticleState cached = flow::transport(s, W, start, s.schedule().end(), exact(), &cache);
      CHECK(dist(direct.x, cached.x) < 1e-11);
    }
  }

  TEST_CASE("semigroup at block boundaries") {
    const FieldSpec spec = FieldSpec::u_rho(0.3, 12, 1, 5);
    const auto W = testing::brownian_path(12, 0.0, spec.schedule().end(), 1.0 / 4096, 0.3);
    const double mid = fields::boundary_time(spec, {3, 2});
    const double end = spec.schedule().end();
    const ParticleState start{0.0, {0.5, -0.5}};
    const ParticleState one = flow::transport(spec, W, start, end, exact());
    const ParticleState half = flow::transport(spec, W, start, mid, exact());
    const ParticleState two = flow::transport(spec, W, half, end, exact());
    CHECK(dist(one.x, two.x) < 1e-10);
    const auto traj = flow::solve(spec, W, start, end, exact());
    CHECK(dist(traj.back().x, one.x) == 0.0);
  }

  TEST_CASE("translation by a common spatial period") {
    // A shift by 2 pi along both axes is a period of every block with A = 1 and integer wavenumber scale.
    fields::FieldParams p;
    p.kind = fields::FieldKind::URho;
    p.exponent = 0.25;
    p.seed = 4;
    p.n_min = 1;
    p.n_max = 4;
    p.pinned_A = 1.0;
    const FieldSpec spec(p);
    const auto W = testing::brownian_path(5, 0.0, spec.schedule().end(), 1.0 / 2048, 0.2);
    const Vec2 shift{kTwoPi, -kTwoPi};
    const Vec2 y{0.3, 1.1};
    const auto a = flow::solve(spec, W, {0.0, y}, spec.schedule().end(), exact());
    const auto b = flow::solve(spec, W, {0.0, y + shift}, spec.schedule().end(), exact());
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(dist(b[i].x, a[i].x + shift) < 1e-10);
  }

  TEST_CASE("euler agrees with the exact shear step and converges at first order") {
    // Noise resolved finer than the Euler step; with a coarse noise grid the sum is second order.
    const FieldSpec spec = FieldSpec::unit(Direction::E1, 23, 40);
    const auto W = testing::brownian_path(5, 0.0, 40.0, 1.0 / 4096, 1.0);
    std::vector<double> err;
    for (int sub : {16, 64, 256}) {
      double mean = 0.0;
      for (std::int64_t j = 0; j < 40; ++j) {
        const ParticleState s{static_cast<double>(j), {0.1 * j, 0.3 * j}};
        const auto e = flow::advance_block(spec, W, s, 0, j, euler(sub));
        const auto x = flow::advance_block(spec, W, s, 0, j, exact());
        mean += dist(e.x, x.x) / 40.0;
      }
      err.push_back(mean);
    }
    CHECK(err[2] < err[1]);
    CHECK(err[1] < err[0]);
    const double slope = std::log(err[0] / err[2]) / std::log(16.0);
    CHECK(slope > 0.8);
    CHECK(slope < 1.2);
  }

  TEST_CASE("noise must cover the block") {
    const FieldSpec spec = FieldSpec::unit(Direction::E1, 1, 4);
    const auto W = testing::zero_path(0.0, 2.0, 0.25);
    CHECK_THROWS_AS(flow::advance_block(spec, W, {3.0, {}}, 0, 3, exact()), std::out_of_range);
    CHECK_THROWS_AS(flow::advance_block(spec, W, {0.5, {}}, 0, 1, exact()), std::invalid_argument);
  }

  TEST_CASE("trajectory csv") {
    std::ostringstream os;
    flow::write_csv(os, {{0.0, {1, 2}}, {1.0, {3, 4}}});
    CHECK(os.str().rfind("t,x1,x2\n", 0) == 0);
    CHECK(os.str().find("1,3,4") != std::string::npos);
  }
}
