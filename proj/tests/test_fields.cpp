#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "shearsep/fields.hpp"
#include "shearsep/rng.hpp"

using namespace shearsep;
using namespace shearsep::fields;

namespace {

// Composite Simpson rule, independent of the library's quadrature.
template <class F>
double simpson(F&& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// Midpoint of the block active at t, in global time.
double block_mid(const FieldSpec& spec, int n, std::int64_t j) {
  const BlockWindow w = block_window(spec, n, j);
  return 0.5 * (w.t_start + w.t_end);
}

}  // namespace

TEST_SUITE("fields") {
  TEST_CASE("bump profile") {
    const BumpProfile phi;
    CHECK(simpson(phi, 0.0, 1.0, 20000) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(phi(0.0) == 0.0);
    CHECK(phi(1.0) == 0.0);
    CHECK(phi(-0.2) == 0.0);
    CHECK(phi.sup() == doctest::Approx(phi(0.5)));
    CHECK(phi.sup() <= 2.0);
    CHECK_THROWS_AS(BumpProfile(5.0), std::invalid_argument);
    CHECK_THROWS_AS(BumpProfile(0.0), std::invalid_argument);
    const BumpProfile sharp(0.3);
    CHECK(simpson(sharp, 0.0, 1.0, 20000) == doctest::Approx(1.0).epsilon(1e-10));
  }

  TEST_CASE("shear direction alternates") {
    CHECK(iota(1) == 1);
    CHECK(iota(2) == 2);
    CHECK(iota(7) == 1);
    CHECK(iota_direction(4) == Direction::E2);
    CHECK_THROWS(iota(0));
  }

  TEST_CASE("schedule gap arithmetic for rho = 1/4") {
    const ScaleSchedule s = ScaleSchedule::u_rho(0.25, 1, 3);
    const double gap = 4.0 * std::exp2(-2.125);
    CHECK(s.gap(1) == doctest::Approx(gap).epsilon(1e-14));
    CHECK(s.blocks(1) == 4);
    CHECK(s.scale_at(s.T(1) + 0.5 * gap) == 1);
    CHECK(s.T(3) == 0.0);
    CHECK(s.start() == 0.0);
    CHECK(s.end() == doctest::Approx(s.gap(1) + s.gap(2) + s.gap(3)));
    CHECK_THROWS_AS(s.scale_at(s.end()), std::out_of_range);
    CHECK_THROWS_AS(s.scale_at(-1e-9), std::out_of_range);
    CHECK_THROWS_AS(ScaleSchedule::u_rho(0.5, 1, 3), std::invalid_argument);
    CHECK_THROWS_AS(ScaleSchedule::v_alpha(0.5, 1, 3), std::invalid_argument);
  }

  TEST_CASE("exactly one scale is active at every probe time") {
    for (const FieldSpec& spec : {FieldSpec::u_rho(0.3, 1, 1, 6), FieldSpec::v_alpha(0.1, 1, 2, 9)}) {
      const ScaleSchedule& s = spec.schedule();
      for (int k = 0; k < 4000; ++k) {
        const double t = s.end() * k / 4000.0;
        const int n = s.scale_at(t);
        int hits = 0;
        for (int m = s.n_min(); m <= s.n_max(); ++m) hits += (s.T(m) <= t && t < s.T(m - 1));
        CHECK(hits == 1);
        CHECK(s.T(n) <= t);
        CHECK(t < s.T(n - 1));
      }
    }
  }

  TEST_CASE("block parameters") {
    const FieldSpec spec = FieldSpec::u_rho(0.25, 99, 1, 5);
    for (int n = 1; n <= 5; ++n) {
      for (std::int64_t j = 0; j < spec.schedule().blocks(n); ++j) {
        const ShearBlock b = shear_params(spec, n, j);
        CHECK(b.A >= 0.5);
        CHECK(b.A <= 2.0);
        CHECK(b.B >= 0.0);
        CHECK(b.B < kTwoPi);
        CHECK(b.direction == iota_direction(n));
        const ShearBlock again = shear_params(spec, n, j);
        CHECK(again.A == b.A);
        CHECK(again.B == b.B);
      }
    }
    CHECK(shear_params(spec.with_seed(100), 3, 2).A != shear_params(spec, 3, 2).A);
    CHECK_THROWS_AS(shear_params(spec, 6, 0), std::out_of_range);
    CHECK_THROWS_AS(shear_params(spec, 1, 4), std::out_of_range);
  }

  TEST_CASE("unit field lines up with the tagged scale") {
    const FieldSpec multi = FieldSpec::v_alpha(0.0, 5, 3, 6);
    const FieldSpec unit = FieldSpec::unit(Direction::E1, 5, multi.schedule().blocks(5), 5);
    for (std::int64_t j = 0; j < multi.schedule().blocks(5); ++j) {
      CHECK(shear_params(unit, 5, j).A == shear_params(multi, 5, j).A);
      CHECK(shear_params(unit, 5, j).B == shear_params(multi, 5, j).B);
    }
  }

  TEST_CASE("field vanishes at block starts and respects the envelope") {
    const FieldSpec spec = FieldSpec::u_rho(0.25, 3, 1, 5);
    const ScaleSchedule& s = spec.schedule();
    for (int n = 1; n <= 5; ++n) {
      CHECK(eval_field(spec, s.T(n), {0.3, 0.7}) == Vec2{});
      const double envelope = 2.0 * std::exp2(0.25 * n);
      for (int k = 0; k < 200; ++k) {
        const double t = s.T(n) + s.gap(n) * (k + 0.5) / 200.0;
        const Vec2 v = eval_field(spec, t, {0.1 * k, -0.07 * k});
        CHECK(v.norm() <= envelope);
        CHECK(std::abs(v[moved_axis(s.direction(n))]) == v.norm());
      }
    }
    CHECK_THROWS_AS(eval_field(spec, s.end(), {}), std::out_of_range);
  }

  TEST_CASE("unit-amplitude shear with a pinned wavenumber") {
    FieldParams p;
    p.kind = FieldKind::Unit;
    p.blocks = 3;
    p.seed = 8;
    p.pinned_A = 1.0;
    const FieldSpec spec(p);
    const ShearBlock b = shear_params(spec, 0, 1);
    CHECK(b.A == 1.0);
    const double x2 = std::numbers::pi / 2 - b.B;
    const Vec2 v = eval_field(spec, 1.5, {0.0, x2});
    CHECK(v.x1 == doctest::Approx(spec.bump().sup()).epsilon(1e-14));
    CHECK(v.x2 == 0.0);
    p.pinned_A = 3.0;
    CHECK_THROWS_AS(FieldSpec{p}, std::invalid_argument);
  }

  TEST_CASE("divergence free") {
    const FieldSpec spec = FieldSpec::u_rho(0.25, 11, 1, 4);
    const ScaleSchedule& s = spec.schedule();
    for (int k = 0; k < 300; ++k) {
      const double t = s.end() * (k + 0.37) / 300.0;
      const int n = s.scale_at(t);
      const double period = kTwoPi / (2.0 * std::exp2(n));
      const double h = 1e-6 * period;
      const Vec2 x{0.013 * k, 0.029 * k};
      const double div = (eval_field(spec, t, x + Vec2{h, 0}).x1 - eval_field(spec, t, x - Vec2{h, 0}).x1 +
                          eval_field(spec, t, x + Vec2{0, h}).x2 - eval_field(spec, t, x - Vec2{0, h}).x2) /
                         (2.0 * h);
      const double grad_scale = std::max(1.0, s.amplitude(n) * 2.0 * std::exp2(n) * 2.0);
      CHECK(std::abs(div) <= 1e-4 * grad_scale);
    }
  }

  TEST_CASE("spatial periodicity along the read coordinate") {
    const FieldSpec spec = FieldSpec::v_alpha(0.2, 4, 2, 6);
    const ScaleSchedule& s = spec.schedule();
    for (int n = 2; n <= 6; ++n) {
      const std::int64_t j = s.blocks(n) / 2;
      const BlockWindow w = block_window(spec, n, j);
      const double t = block_mid(spec, n, j);
      Vec2 shift{};
      shift[read_axis(w.params.direction)] = kTwoPi / w.wavenumber;
      for (int k = 0; k < 20; ++k) {
        const Vec2 x{0.31 * k, -0.17 * k};
        const Vec2 a = eval_field(spec, t, x);
        const Vec2 b = eval_field(spec, t, x + shift);
        CHECK(std::abs(a.x1 - b.x1) <= 1e-9 * std::max(1.0, std::abs(a.x1)));
        CHECK(std::abs(a.x2 - b.x2) <= 1e-9 * std::max(1.0, std::abs(a.x2)));
      }
    }
  }

  TEST_CASE("evaluation is a pure function") {
    const FieldSpec a = FieldSpec::u_rho(0.25, 21, 1, 5);
    const FieldSpec b = FieldSpec::u_rho(0.25, 21, 1, 5);
    for (int k = 0; k < 100; ++k) {
      const double t = a.schedule().end() * k / 100.0;
      CHECK(eval_field(a, t, {0.5, 0.25}) == eval_field(b, t, {0.5, 0.25}));
    }
  }

  TEST_CASE("block navigation") {
    const FieldSpec spec = FieldSpec::u_rho(0.25, 1, 1, 3);
    const ScaleSchedule& s = spec.schedule();
    BlockIndex b = first_block(spec);
    std::int64_t count = 0;
    double last = -1.0;
    while (!(b == end_block(spec))) {
      const double t = boundary_time(spec, b);
      CHECK(t > last);
      CHECK(snap_to_boundary(spec, t) == b);
      last = t;
      b = next_block(spec, b);
      ++count;
    }
    CHECK(count == s.blocks(1) + s.blocks(2) + s.blocks(3));
    CHECK(blocks_between(spec, first_block(spec), end_block(spec)) == count);
    CHECK(boundary_time(spec, end_block(spec)) == s.end());
    CHECK_THROWS_AS(next_block(spec, end_block(spec)), std::out_of_range);
    CHECK_THROWS_AS(snap_to_boundary(spec, s.end() + 1.0), std::out_of_range);
    CHECK_THROWS_AS(blocks_between(spec, end_block(spec), first_block(spec)), std::invalid_argument);
  }

  TEST_CASE("canonical json and hash") {
    const FieldSpec spec = FieldSpec::u_rho(0.25, 7, 1, 8);
    const std::string j = canonical_json(spec.params());
    CHECK(j.find("\"kind\":\"u_rho\"") != std::string::npos);
    CHECK(j.find("\"n_max\":8") != std::string::npos);
    CHECK(spec_hash(spec.params()) == spec_hash(FieldSpec::u_rho(0.25, 7, 1, 8).params()));
    CHECK(spec_hash(spec.params()) != spec_hash(spec.with_seed(8).params()));
    CHECK(parse_kind(kind_name(FieldKind::VAlpha)) == FieldKind::VAlpha);
    CHECK_THROWS_AS(parse_kind("w_beta"), std::invalid_argument);
  }

  TEST_CASE("holder norm of the field on a grid") {
    const FieldSpec spec = FieldSpec::v_alpha(0.0, 13, 2, 5);
    const ScaleSchedule& s = spec.schedule();
    const int n = 4;
    const std::int64_t j = 1;
    const BlockWindow w = block_window(spec, n, j);
    const double period = kTwoPi / w.wavenumber;
    SpatialGrid grid;
    grid.step = period / 400.0;
    grid.nx = 401;
    grid.ny = 401;
    if (read_axis(w.params.direction) == 0) grid.ny = 1;
    else grid.nx = 1;
    // Inactive: block start.
    CHECK(holder_norm_field(spec, w.t_start, 0.0, grid) == 0.0);
    // At the bump peak the sup over one period is sup(phi).
    const double mid = block_mid(spec, n, j);
    const double sup = holder_norm_field(spec, mid, 0.0, grid);
    CHECK(sup == doctest::Approx(spec.bump().sup()).epsilon(1e-4));
    CHECK(sup <= 2.0);
    const double h = holder_norm_field(spec, mid, 0.5, grid);
    CHECK(h > sup);
    CHECK(h <= 4.0 * std::pow(w.wavenumber, 0.5));
    SpatialGrid coarse = grid;
    coarse.step = period / 8.0;
    CHECK_THROWS_AS(holder_norm_field(spec, mid, 0.0, coarse), std::invalid_argument);
    CHECK_THROWS_AS(holder_norm_field(spec, mid, 1.0, grid), std::invalid_argument);
    (void)s;
  }

  TEST_CASE("cosine holder constant against a brute-force maximum") {
    CHECK(cosine_holder_constant(1.0) == 1.0);
    for (double gamma : {0.25, 0.5, 0.75, 0.9}) {
      double best = 0.0;
      for (int k = 1; k <= 200000; ++k) {
        const double hh = std::numbers::pi * k / 200000.0;
        best = std::max(best, 2.0 * std::sin(0.5 * hh) / std::pow(hh, gamma));
      }
      CHECK(cosine_holder_constant(gamma) == doctest::Approx(best).epsilon(1e-8));
    }
    CHECK_THROWS_AS(cosine_holder_constant(0.0), std::invalid_argument);
  }

  TEST_CASE("negative holder bound of the explicit primitive") {
    const FieldSpec spec = FieldSpec::u_rho(0.25, 17, 1, 6);
    const ScaleSchedule& s = spec.schedule();
    CHECK(negative_holder_upper_bound(spec, s.T(3), 0.25) == 0.0);
    CHECK_THROWS_AS(negative_holder_upper_bound(spec, s.T(3), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(negative_holder_upper_bound(FieldSpec::v_alpha(0.1, 1, 1, 3), 0.1, 0.25), std::invalid_argument);
    // Primitive amplitude 2^(rho n) phi / (A 2^n).
    for (int n = 1; n <= 6; ++n) {
      const BlockWindow w = block_window(spec, n, 0);
      const double t = block_mid(spec, n, 0);
      const double amp = std::exp2(0.25 * n) * spec.bump().sup() / w.wavenumber;
      const double expected = amp * (1.0 + cosine_holder_constant(0.75) * std::pow(w.wavenumber, 0.75));
      CHECK(negative_holder_upper_bound(spec, t, 0.25) == doctest::Approx(expected).epsilon(1e-9));
    }
  }

  TEST_CASE("time-integrated sup norm stays under the ledger bound") {
    for (double rho : {0.1, 0.25, 0.4}) {
      const FieldSpec spec = FieldSpec::u_rho(rho, 31, 1, 6);
      double ledger = 0.0;
      for (int n = 1; n <= 6; ++n) ledger += std::exp2(-rho * n / 4.0);
      ledger *= 2.0 * spec.bump().sup();
      CHECK(l1_c0_norm(spec, 1, 6) <= ledger * 1.01);
    }
    CHECK_THROWS_AS(l1_c0_norm(FieldSpec::u_rho(0.25, 1, 1, 3), 3, 1), std::invalid_argument);
  }

  TEST_CASE("golden field values") {
    const std::filesystem::path path = std::filesystem::path(SHEARSEP_GOLDEN_DIR) / "eval_field.csv";
    const std::vector<FieldSpec> specs = {FieldSpec::u_rho(0.25, 2024, 1, 6), FieldSpec::v_alpha(0.0, 7, 3, 8),
                                          FieldSpec::v_alpha(0.3, 99, 2, 7), FieldSpec::unit(Direction::E2, 5, 12)};
    std::ostringstream fresh;
    fresh << "spec,t,x1,x2,u1,u2\n";
    for (std::size_t k = 0; k < specs.size(); ++k) {
      const FieldSpec& spec = specs[k];
      for (int i = 0; i < 20; ++i) {
        const auto [a, b] = rng::uniform_pair(1234 + k, rng::Domain::Noise, static_cast<std::uint64_t>(i));
        const double t = spec.schedule().end() * (i + 0.5) / 20.0;
        const Vec2 x{4.0 * a - 2.0, 4.0 * b - 2.0};
        const Vec2 u = eval_field(spec, t, x);
        fresh << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", k, t, x.x1, x.x2, u.x1, u.x2);
      }
    }
    if (std::getenv("SHEARSEP_REGEN_GOLDEN")) {
      std::ofstream(path) << fresh.str();
    }
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream stored;
    stored << in.rdbuf();
    // Parse both and compare numerically (libm may differ in the last ulp).
    std::istringstream a(stored.str());
    std::istringstream b(fresh.str());
    std::string la;
    std::string lb;
    int rows = 0;
    while (std::getline(a, la) && std::getline(b, lb)) {
      if (rows++ == 0) {
        CHECK(la == lb);
        continue;
      }
      std::vector<double> va;
      std::vector<double> vb;
      std::istringstream sa(la);
      std::istringstream sb(lb);
      for (std::string tok; std::getline(sa, tok, ',');) va.push_back(std::stod(tok));
      for (std::string tok; std::getline(sb, tok, ',');) vb.push_back(std::stod(tok));
      REQUIRE(va.size() == vb.size());
      for (std::size_t i = 0; i < va.size(); ++i) CHECK(std::abs(va[i] - vb[i]) <= 1e-12 * std::max(1.0, std::abs(va[i])));
    }
    CHECK(rows == 81);
  }
}
