#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "potentia/config.hpp"
#include "potentia/errors.hpp"
#include "potentia/kernel.hpp"

using namespace potentia;

namespace {

const Point kOrigin{0.0, 0.0, 0.0};
constexpr double kInf = std::numeric_limits<double>::infinity();

BallConfig lattice(double spacing, double c, double beta, int n_max,
                   Point x0 = kOrigin) {
  GeneratorSpec g;
  g.spacing = spacing;
  g.phi = RadiusLaw{c, beta};
  g.n_max = n_max;
  return BallConfig::lattice_config(std::move(x0), g);
}

}  // namespace

TEST_CASE("radius law evaluates the power envelope") {
  CHECK(RadiusLaw{0.5, 0.0}(7.3) == doctest::Approx(0.5));
  CHECK(RadiusLaw{0.5, 1.0}(4.0) == doctest::Approx(0.125));
  CHECK(RadiusLaw{0.5, 2.0}(4.0) == doctest::Approx(0.03125));
  CHECK(RadiusLaw{0.5, 3.0}(4.0) == doctest::Approx(0.5 / 64.0));
  CHECK(RadiusLaw{2.0, 1.7}(3.0) == doctest::Approx(2.0 * std::pow(3.0, -1.7)));
  const RadiusLaw law{1.0, 1.0};
  CHECK_THROWS_AS(law(0.0), Error);
  CHECK_THROWS_AS(law(-2.0), Error);
}

TEST_CASE("unit ball volumes") {
  CHECK(unit_ball_volume(1) == doctest::Approx(2.0));
  CHECK(unit_ball_volume(2) == doctest::Approx(3.14159265358979324));
  CHECK(unit_ball_volume(3) == doctest::Approx(4.18879020478639098));
  CHECK_THROWS_AS(unit_ball_volume(0), Error);
}

TEST_CASE("explicit configs validate dimensions, radii and disjointness") {
  CHECK_NOTHROW(BallConfig::explicit_config(
      kOrigin, {Ball{{4, 0, 0}, 1.0}, Ball{{-4, 0, 0}, 1.0}}));

  // touching counts as overlap: the balls are closed
  CHECK_THROWS_AS(BallConfig::explicit_config(
                      kOrigin, {Ball{{0, 0, 0}, 1.0}, Ball{{2, 0, 0}, 1.0}}),
                  Error);
  try {
    BallConfig::explicit_config(kOrigin,
                                {Ball{{0, 0, 0}, 1.0}, Ball{{1.5, 0, 0}, 1.0}});
    FAIL("overlap not detected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::scene_overlap);
  }

  try {
    BallConfig::explicit_config(kOrigin, {Ball{{0, 0}, 1.0}});
    FAIL("dimension mismatch not detected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::scene_dimension);
  }

  CHECK_THROWS_AS(BallConfig::explicit_config(kOrigin, {Ball{{0, 0, 0}, 0.0}}),
                  Error);
  CHECK_THROWS_AS(BallConfig::explicit_config(kOrigin, {Ball{{0, 0, 0}, -1.0}}),
                  Error);
}

TEST_CASE("overlap detection scales through the grid path") {
  // above the pair-scan threshold the check runs against a hash grid; plant
  // one overlapping pair among 6000 well-separated balls
  std::vector<Ball> balls;
  for (int i = 0; i < 6000; ++i) {
    balls.push_back(Ball{{3.0 * i + 10.0, 0.0, 0.0}, 1.0});
  }
  CHECK_NOTHROW(BallConfig::explicit_config(kOrigin, balls));
  balls.push_back(Ball{{3.0 * 4321 + 11.0, 0.0, 0.0}, 1.0});
  CHECK_THROWS_AS(BallConfig::explicit_config(kOrigin, balls), Error);
}

TEST_CASE("generator validation") {
  CHECK_THROWS_AS(lattice(0.0, 0.5, 0.0, 3), Error);
  CHECK_THROWS_AS(lattice(4.0, 0.0, 0.0, 3), Error);
  CHECK_THROWS_AS(lattice(4.0, 0.5, -1.0, 3), Error);
  CHECK_THROWS_AS(lattice(4.0, 0.5, 0.0, -1), Error);
  CHECK_THROWS_AS(lattice(4.0, 0.5, 0.0, 25), Error);

  // unit spacing with radius 0.6 balls: neighbors overlap
  try {
    lattice(1.0, 0.6, 0.0, 3);
    FAIL("lattice overlap not detected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::scene_overlap);
  }
  CHECK_NOTHROW(lattice(1.0, 0.49, 0.0, 3));
}

TEST_CASE("lattice counts with the open truncation ball") {
  // |k|^2 < 4 keeps the 26 sites with k^2 in {1,2,3}; a closed ball would
  // also admit the six axis sites at exactly 2*spacing
  CHECK(lattice(4.0, 0.5, 0.0, 1).ball_count() == 26);
  // sum of r3(k) for k = 1..15
  CHECK(lattice(4.0, 0.5, 0.0, 2).ball_count() == 250);
  // open ball of radius spacing contains no nonzero site
  CHECK(lattice(4.0, 0.5, 0.0, 0).ball_count() == 0);
}

TEST_CASE("shell enumeration counts are exact") {
  BallConfig cfg = lattice(4.0, 0.5, 0.0, 4);
  CHECK(cfg.for_each_in_shell(1.0, 4.0, [](const Ball&) {}) == 0);
  CHECK(cfg.for_each_in_shell(4.0, 8.0, [](const Ball&) {}) == 26);
  CHECK(cfg.for_each_in_shell(8.0, 16.0, [](const Ball&) {}) == 224);
  CHECK(cfg.for_each_in_shell(16.0, 32.0, [](const Ball&) {}) == 1852);
  CHECK_THROWS_AS(cfg.for_each_in_shell(4.0, 4.0, [](const Ball&) {}), Error);
  CHECK_THROWS_AS(cfg.for_each_in_shell(-1.0, 4.0, [](const Ball&) {}), Error);
}

TEST_CASE("shell membership is half-open by center distance") {
  BallConfig cfg = BallConfig::explicit_config(
      kOrigin, {Ball{{4, 0, 0}, 0.5}, Ball{{8, 0, 0}, 0.5}});
  CHECK(cfg.for_each_in_shell(2.0, 4.0, [](const Ball&) {}) == 0);
  CHECK(cfg.for_each_in_shell(4.0, 8.0, [](const Ball&) {}) == 1);
  CHECK(cfg.for_each_in_shell(8.0, 16.0, [](const Ball&) {}) == 1);
}

TEST_CASE("generated balls carry the envelope radius") {
  BallConfig cfg = lattice(4.0, 0.5, 2.0, 2);
  bool seen = false;
  cfg.for_each_in_shell(3.9, 4.1, [&](const Ball& b) {
    seen = true;
    CHECK(b.radius == doctest::Approx(0.5 / 16.0));
    CHECK(norm(b.center) == doctest::Approx(4.0));
  });
  CHECK(seen);

  // deterministic enumeration order
  std::vector<double> first, second;
  cfg.for_each([&](const Ball& b) { first.push_back(b.center[0]); });
  cfg.for_each([&](const Ball& b) { second.push_back(b.center[0]); });
  CHECK(first == second);
}

TEST_CASE("lattice enumeration respects a shifted reference point") {
  Point x0{1.0, -2.0, 0.5};
  BallConfig cfg = lattice(4.0, 0.5, 0.0, 1, x0);
  CHECK(cfg.ball_count() == 26);
  cfg.for_each([&](const Ball& b) {
    const double rho = distance(b.center, x0);
    CHECK(rho >= 4.0 - 1e-12);
    CHECK(rho < 8.0);
  });
}

TEST_CASE("reach and center distances") {
  BallConfig two = BallConfig::explicit_config(
      kOrigin, {Ball{{4, 0, 0}, 1.0}, Ball{{-6, 0, 0}, 0.5}});
  CHECK(two.reach() == doctest::Approx(6.5));
  CHECK(two.min_center_distance() == doctest::Approx(4.0));
  CHECK(two.nearest_center_spacing() == doctest::Approx(10.0));

  BallConfig lat = lattice(4.0, 0.5, 0.0, 3);
  CHECK(lat.reach() == doctest::Approx(32.0 + 0.5));
  CHECK(lat.min_center_distance() == doctest::Approx(4.0));
  CHECK(lat.nearest_center_spacing() == doctest::Approx(4.0));

  BallConfig empty = BallConfig::explicit_config(kOrigin, {});
  CHECK(empty.reach() == 0.0);
  CHECK(empty.min_center_distance() == kInf);
  CHECK(empty.nearest_center_spacing() == kInf);
}

TEST_CASE("materialization matches the lazy enumeration and honors its cap") {
  BallConfig cfg = lattice(4.0, 0.5, 1.0, 2);
  auto balls = cfg.materialize();
  CHECK(balls.size() == 250);
  double sum_lazy = 0.0, sum_mat = 0.0;
  cfg.for_each([&](const Ball& b) { sum_lazy += norm(b.center) + b.radius; });
  for (const auto& b : balls) sum_mat += norm(b.center) + b.radius;
  CHECK(sum_lazy == doctest::Approx(sum_mat));

  CHECK_THROWS_AS(lattice(4.0, 0.5, 0.0, 8).materialize(), Error);
  CHECK_NOTHROW(lattice(4.0, 0.5, 0.0, 8).materialize(100'000'000));
}

TEST_CASE("disjointness factor") {
  BallConfig pair = BallConfig::explicit_config(
      kOrigin, {Ball{{4, 0, 0}, 1.0}, Ball{{-4, 0, 0}, 1.0}});
  CHECK(pair.disjointness_factor() == doctest::Approx(4.0));
  BallConfig single = BallConfig::explicit_config(kOrigin, {Ball{{4, 0, 0}, 1.0}});
  CHECK(single.disjointness_factor() == kInf);
}

TEST_CASE("separation infimum frozen two-ball values") {
  Kernel k(3, 2.0);
  // (rho(z,z')/(16 rho))^3 * g(r)/g(rho) = (8/64)^3 * 4 = 1/128 at distance 4
  BallConfig at4 = BallConfig::explicit_config(
      kOrigin, {Ball{{4, 0, 0}, 1.0}, Ball{{-4, 0, 0}, 1.0}});
  CHECK(separation_infimum(at4, k) == doctest::Approx(1.0 / 128.0));

  BallConfig at8 = BallConfig::explicit_config(
      kOrigin, {Ball{{8, 0, 0}, 1.0}, Ball{{-8, 0, 0}, 1.0}});
  CHECK(separation_infimum(at8, k) == doctest::Approx(1.0 / 64.0));

  BallConfig single = BallConfig::explicit_config(kOrigin, {Ball{{4, 0, 0}, 1.0}});
  CHECK(separation_infimum(single, k) == kInf);
}

TEST_CASE("separation infimum of a fixed-radius lattice decays like rho^-alpha") {
  // The per-ball term (spacing/(16 rho))^d g(r)/g(rho) is minimized at the
  // outermost site, so the infimum of the truncated lattice shrinks by about
  // 2^-alpha per extra doubling shell instead of stabilizing.
  Kernel k(3, 2.0);
  double prev = kInf;
  for (int n_max : {3, 4, 5}) {
    BallConfig cfg = lattice(4.0, 0.5, 0.0, n_max);
    // independent evaluation at the outermost materialized center
    double rho_max = 0.0;
    cfg.for_each([&](const Ball& b) { rho_max = std::max(rho_max, norm(b.center)); });
    const double expect = std::pow(4.0 / (16.0 * rho_max), 3) *
                          (k.g(0.5) / k.g(rho_max));
    const double got = separation_infimum(cfg, k);
    CHECK(got == doctest::Approx(expect));
    CHECK(got > 0.0);
    CHECK(got < prev);
    prev = got;
  }
}

TEST_CASE("criterion series for the fixed-radius lattice") {
  Kernel k(3, 2.0);
  BallConfig cfg = lattice(4.0, 0.5, 0.0, 4);
  CriterionSeries cs = criterion_series(cfg, k, 0, 5);
  REQUIRE(cs.shells.size() == 6);

  // n = 2 shell: 6 sites at rho 4, 12 at 4*sqrt(2), 8 at 4*sqrt(3), each term
  // g(rho)/g(1/2) = 1/(2 rho)
  const double expect2 = 6.0 / 8.0 + 12.0 / (8.0 * std::sqrt(2.0)) +
                         8.0 / (8.0 * std::sqrt(3.0));
  CHECK(cs.shells[2].ball_count == 26);
  CHECK(cs.shells[2].term == doctest::Approx(expect2));
  CHECK(cs.shells[0].term == 0.0);
  CHECK(cs.shells[1].term == 0.0);

  double prev = 0.0;
  for (const auto& s : cs.shells) {
    CHECK(s.partial_sum >= prev);
    CHECK(s.partial_sum == doctest::Approx(prev + s.term));
    prev = s.partial_sum;
  }
  CHECK(cs.total == doctest::Approx(prev));

  // dyadic growth exponent ~2 for beta = 0: log2 of consecutive shell terms
  for (std::size_t i = 3; i + 1 < cs.shells.size(); ++i) {
    const double slope = std::log2(cs.shells[i + 1].term / cs.shells[i].term);
    CHECK(slope == doctest::Approx(2.0).epsilon(0.02));
  }
}

TEST_CASE("criterion series trivial cases") {
  Kernel k(3, 2.0);
  CriterionSeries empty =
      criterion_series(BallConfig::explicit_config(kOrigin, {}), k);
  CHECK(empty.shells.empty());
  CHECK(empty.total == 0.0);

  CHECK_THROWS_AS(
      criterion_series(BallConfig::explicit_config({0.0, 0.0}, {}), k), Error);

  // single ball at rho = 4, r = 1: the only contribution is g(4)/g(1) = 1/4
  BallConfig one = BallConfig::explicit_config(kOrigin, {Ball{{4, 0, 0}, 1.0}});
  CriterionSeries cs = criterion_series(one, k);
  double total = 0.0;
  for (const auto& s : cs.shells) total += s.term;
  CHECK(total == doctest::Approx(0.25));
}

TEST_CASE("power-law classifier covers the boundary case") {
  // (1+beta)(d-alpha) <= d  with equality included
  CHECK(powerlaw_classifier(3, 2.0, 0.0).kind == VerdictKind::Unavoidable);
  CHECK(powerlaw_classifier(3, 2.0, 1.0).kind == VerdictKind::Unavoidable);
  CHECK(powerlaw_classifier(3, 2.0, 2.0).kind == VerdictKind::Unavoidable);
  CHECK(powerlaw_classifier(3, 2.0, 2.5).kind == VerdictKind::Avoidable);
  CHECK(powerlaw_classifier(3, 2.0, 3.0).kind == VerdictKind::Avoidable);
  CHECK(powerlaw_classifier(3, 1.5, 1.0).kind == VerdictKind::Unavoidable);
  CHECK(powerlaw_classifier(3, 1.5, 1.1).kind == VerdictKind::Avoidable);

  CHECK(powerlaw_exponent(3, 2.0, 0.0) == doctest::Approx(2.0));
  CHECK(powerlaw_exponent(3, 2.0, 2.0) == doctest::Approx(0.0));
  CHECK(powerlaw_exponent(3, 2.0, 3.0) == doctest::Approx(-1.0));
  CHECK(powerlaw_exponent(3, 1.5, 2.0) == doctest::Approx(-1.5));

  CHECK(!powerlaw_classifier(3, 2.0, 2.0).rationale.empty());
}

TEST_CASE("measure-volume growth condition") {
  Kernel k(3, 2.0);
  MvReport grow = mv_condition(lattice(4.0, 0.5, 0.0, 3), k, {10.0, 100.0});
  CHECK(grow.holds);
  CHECK(grow.exponent == doctest::Approx(2.0));
  REQUIRE(grow.samples.size() == 2);
  // h(10) = v3 * 10^3 * g(10)/g(0.5) = v3 * 1000 * 0.1 * 0.5
  CHECK(grow.samples[0].h == doctest::Approx(unit_ball_volume(3) * 50.0));

  MvReport shrink = mv_condition(lattice(4.0, 0.5, 3.0, 3), k, {10.0});
  CHECK(!shrink.holds);
  CHECK(shrink.exponent == doctest::Approx(-1.0));
}

TEST_CASE("regularity check accepts the lattice and pins envelope violations") {
  BallConfig lat = lattice(4.0, 0.5, 2.0, 3);
  RegularityReport rep = regularity_check(lat, 2.0);
  CHECK(rep.regular);
  CHECK(rep.min_center_gap == doctest::Approx(4.0));
  CHECK(rep.probes_failed == 0);

  // explicit config against a user envelope: radius must sit inside
  // (phi, C*phi) strictly
  BallConfig ok = BallConfig::explicit_config(kOrigin, {Ball{{4, 0, 0}, 0.5}});
  RegularityReport pass =
      regularity_check(ok, 2.0, RadiusLaw{0.4, 0.0});
  CHECK(pass.regular);

  BallConfig thin = BallConfig::explicit_config(kOrigin, {Ball{{4, 0, 0}, 0.3}});
  RegularityReport fail =
      regularity_check(thin, 2.0, RadiusLaw{0.4, 0.0});
  CHECK(!fail.regular);
  CHECK(fail.failure.find("ball 0") != std::string::npos);
}
