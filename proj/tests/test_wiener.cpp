#include <cmath>
#include <optional>

#include "doctest.h"
#include "potentia/config.hpp"
#include "potentia/errors.hpp"
#include "potentia/kernel.hpp"
#include "potentia/wiener.hpp"

using namespace potentia;

namespace {

BallConfig lattice4(double beta, int n_max) {
  GeneratorSpec g;
  g.spacing = 4.0;
  g.phi = RadiusLaw{0.5, beta};
  g.n_max = n_max;
  return BallConfig::lattice_config(Point{0, 0, 0}, g);
}

SeriesReport hand_report(const std::vector<double>& terms, bool complete) {
  SeriesReport rep;
  rep.complete = complete;
  double run = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    ShellRow row;
    row.n = static_cast<int>(i);
    row.inner_radius = std::pow(2.0, row.n);
    row.outer_radius = 2.0 * row.inner_radius;
    row.ball_count = 1;
    row.cap.value = terms[i] * row.inner_radius;  // g = 1/rho for (3,2)
    row.term = terms[i];
    run += terms[i];
    row.partial_sum = run;
    rep.shells.push_back(row);
  }
  rep.total = run;
  return rep;
}

}  // namespace

TEST_CASE("shell decomposition structure on the constant-radius lattice") {
  Kernel k(3, 2.0);
  auto rep = shell_capacities(lattice4(0.0, 5), k, 1.0, 2.0, 5);
  REQUIRE(rep.shells.size() == 6);
  CHECK(rep.gamma == 2.0);
  CHECK(rep.R == 1.0);
  CHECK_FALSE(rep.complete);  // generator configs stand for infinite objects

  const std::uint64_t counts[6] = {0, 0, 26, 224, 1852, 14968};
  double running = 0.0;
  for (int n = 0; n <= 5; ++n) {
    const auto& row = rep.shells[n];
    CHECK(row.n == n);
    CHECK(row.inner_radius == doctest::Approx(std::pow(2.0, n)));
    CHECK(row.outer_radius == doctest::Approx(std::pow(2.0, n + 1)));
    CHECK(row.ball_count == counts[n]);
    CHECK(row.term ==
          doctest::Approx(k.g(row.inner_radius) * row.cap.value).epsilon(1e-12));
    running += row.term;
    CHECK(row.partial_sum == doctest::Approx(running).epsilon(1e-12));
    CHECK(row.cap.lower <= row.cap.value + 1e-12);
    CHECK(row.cap.value <= row.cap.upper + 1e-12);
  }
  CHECK(rep.total == doctest::Approx(running).epsilon(1e-12));

  // 26 balls go through the LP; 224+ exceed the default lp_max_balls
  CHECK_FALSE(rep.shells[2].fast_path);
  CHECK(rep.shells[3].fast_path);
  CHECK(rep.shells[4].fast_path);
}

TEST_CASE("frozen shell capacities across the radius-law family") {
  // reference values from a pinned run of this solver (gamma=2, spacing 4,
  // c=0.5); the shell-2 LP runs 26 balls at 24 boundary points each
  Kernel k(3, 2.0);
  struct Row {
    double beta, cap2, term3;
  };
  const Row rows[] = {
      {0.0, 4.70167, 1.93333},
      {1.0, 1.77349, 1.16240},
      {2.0, 0.425685, 0.100221},
      {2.5, 0.196323, 0.0298699},
      {3.0, 0.0898791, 0.00899283},
  };
  for (const Row& r : rows) {
    auto rep = shell_capacities(lattice4(r.beta, 4), k, 1.0, 2.0, 3);
    CHECK(rep.shells[2].cap.value == doctest::Approx(r.cap2).epsilon(1e-4));
    CHECK(rep.shells[3].term == doctest::Approx(r.term3).epsilon(1e-4));
  }
}

TEST_CASE("shell capacity upper bounds are hull-capped") {
  // shell [4,8) of the spacing-4 lattice reaches out to 4*sqrt(3)+1/2, and the
  // enclosing-ball capacity beats the 26-term sum of per-ball bounds
  Kernel k(3, 2.0);
  const double hull = 4.0 * std::sqrt(3.0) + 0.5;

  auto lp = shell_capacities(lattice4(0.0, 2), k, 1.0, 2.0, 2);
  CHECK(lp.shells[2].cap.upper == doctest::Approx(hull).epsilon(1e-12));

  ShellOptions fast;
  fast.lp_max_balls = 1;
  auto f = shell_capacities(lattice4(0.0, 2), k, 1.0, 2.0, 2, fast);
  CHECK(f.shells[2].fast_path);
  CHECK(f.shells[2].cap.value == doctest::Approx(hull).epsilon(1e-12));
  CHECK(f.shells[2].cap.lower == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(lp.shells[2].cap.value <= f.shells[2].cap.value + 1e-9);

  // shell [8,16): 224 balls, fast by default, hull 4*sqrt(14)+1/2
  auto rep = shell_capacities(lattice4(0.0, 3), k, 1.0, 2.0, 3);
  CHECK(rep.shells[3].cap.value ==
        doctest::Approx(4.0 * std::sqrt(14.0) + 0.5).epsilon(1e-12));
}

TEST_CASE("classifier kinds across the sweep") {
  Kernel k(3, 2.0);
  auto verdict_for = [&](double beta) {
    return classify(shell_capacities(lattice4(beta, 5), k, 1.0, 2.0, 5));
  };
  CHECK(verdict_for(0.0).kind == VerdictKind::Unavoidable);
  CHECK(verdict_for(1.0).kind == VerdictKind::Unavoidable);
  CHECK(verdict_for(2.0).kind == VerdictKind::Unavoidable);
  CHECK(verdict_for(2.5).kind == VerdictKind::Avoidable);
  CHECK(verdict_for(3.0).kind == VerdictKind::Avoidable);

  auto v = verdict_for(0.0);
  CHECK_FALSE(v.rationale.empty());
  CHECK_FALSE(v.closed_form);
}

TEST_CASE("closed-form verdicts are authoritative") {
  Kernel k(3, 2.0);
  auto rep = shell_capacities(lattice4(0.0, 5), k, 1.0, 2.0, 5);
  Verdict cf{VerdictKind::Avoidable, "forced for the test", false};
  auto v = classify(rep, cf);
  CHECK(v.kind == VerdictKind::Avoidable);
  CHECK(v.closed_form);
  CHECK(v.rationale.find("closed-form rule") == 0);
}

TEST_CASE("trailing empty shells of a truncated report carry no evidence") {
  // at gamma=4 the n_max=8 lattice occupies only shells 1..4; the trailing
  // zeros must not flip a divergent series to Inconclusive
  Kernel k(3, 2.0);
  auto rep = shell_capacities(lattice4(0.0, 8), k, 1.0, 4.0, 8);
  REQUIRE(rep.shells.size() == 9);
  CHECK(rep.shells[4].ball_count == 69176304);
  CHECK(rep.shells[5].ball_count == 0);
  CHECK(rep.shells[8].ball_count == 0);
  CHECK(rep.shells[4].term == doctest::Approx(4.00189).epsilon(1e-4));
  CHECK(classify(rep).kind == VerdictKind::Unavoidable);
}

TEST_CASE("gamma=4 verdicts match gamma=2") {
  // gamma=4 needs the full n_max=8 truncation: it packs the configuration
  // into 4 populated shells, the minimum the trend heuristic can read
  Kernel k(3, 2.0);
  for (double beta : {0.0, 2.0, 3.0}) {
    auto v2 = classify(shell_capacities(lattice4(beta, 8), k, 1.0, 2.0, 8));
    auto v4 = classify(shell_capacities(lattice4(beta, 8), k, 1.0, 4.0, 8));
    CHECK(v2.kind == v4.kind);
  }
}

TEST_CASE("complete explicit reports use their tail as-is") {
  Kernel k(3, 2.0);
  auto cfg = BallConfig::explicit_config(
      Point{0, 0, 0}, {Ball{{1.5, 0, 0}, 0.1}, Ball{{-1.5, 0, 0}, 0.1}});
  auto rep = shell_capacities(cfg, k, 1.0, 2.0, 4);
  CHECK(rep.complete);
  CHECK(rep.shells[0].ball_count == 2);
  CHECK(rep.shells[1].ball_count == 0);
  auto v = classify(rep);
  CHECK(v.kind == VerdictKind::Avoidable);

  auto empty = BallConfig::explicit_config(Point{0, 0, 0}, {});
  auto erep = shell_capacities(empty, k, 1.0, 2.0, 4);
  CHECK(erep.complete);
  CHECK(erep.total == 0.0);
  CHECK(classify(erep).kind == VerdictKind::Avoidable);
}

TEST_CASE("truncated reports with too few occupied shells are Inconclusive") {
  Kernel k(3, 2.0);
  // n_max=1 generator: one occupied shell after trimming
  auto rep = shell_capacities(lattice4(0.0, 1), k, 1.0, 2.0, 5);
  CHECK_FALSE(rep.complete);
  auto v = classify(rep);
  CHECK(v.kind == VerdictKind::Inconclusive);
}

TEST_CASE("hand-built tails exercise every classifier branch") {
  // sustained growth
  CHECK(classify(hand_report({1.0, 1.0, 1.1, 1.0}, false)).kind ==
        VerdictKind::Unavoidable);
  // geometric decay
  CHECK(classify(hand_report({1.0, 0.5, 0.25, 0.125}, false)).kind ==
        VerdictKind::Avoidable);
  // identically tiny tail
  CHECK(classify(hand_report({1e-9, 1e-9, 1e-9, 1e-9}, true)).kind ==
        VerdictKind::Avoidable);
  // slow decay: neither sustained nor geometric
  CHECK(classify(hand_report({1e-3, 9e-4, 8.5e-4, 8e-4}, false)).kind ==
        VerdictKind::Inconclusive);
  // fewer than 4 shells is a usage error
  CHECK_THROWS_AS(classify(hand_report({1.0, 1.0, 1.0}, false)), Error);
}

TEST_CASE("reduced-sum probe tracks divergence and saturates with the config") {
  Kernel k(3, 2.0);
  const Point x{1.0, 0.0, 0.0};

  // unavoidable scene: sums blow past any threshold
  auto b0 = lattice4(0.0, 8);
  CHECK(shell_reduced_sum_probe(b0, k, x, 1.0, 2.0, 4) ==
        doctest::Approx(49.263).epsilon(1e-3));
  CHECK(shell_reduced_sum_probe(b0, k, x, 1.0, 2.0, 8) > 1e4);

  // avoidable scene: increments die off, then the truncation exhausts
  auto b3 = lattice4(3.0, 8);
  const double s8 = shell_reduced_sum_probe(b3, k, x, 1.0, 2.0, 8);
  const double s9 = shell_reduced_sum_probe(b3, k, x, 1.0, 2.0, 9);
  const double s10 = shell_reduced_sum_probe(b3, k, x, 1.0, 2.0, 10);
  CHECK(s8 == doctest::Approx(0.032124).epsilon(1e-3));
  CHECK(s9 - s8 > 0.0);
  CHECK(s9 - s8 < 1e-3);
  CHECK(s10 == s9);

  // a probe point inside some ball contributes exactly 1
  auto one = BallConfig::explicit_config(Point{0, 0, 0}, {Ball{{1.5, 0, 0}, 0.7}});
  CHECK(shell_reduced_sum_probe(one, k, Point{1.5, 0, 0}, 1.0, 2.0, 2) == 1.0);
}

TEST_CASE("series and probe input validation") {
  Kernel k(3, 2.0);
  auto cfg = lattice4(0.0, 2);
  CHECK_THROWS_AS(shell_capacities(cfg, k, 0.0, 2.0, 3), Error);
  CHECK_THROWS_AS(shell_capacities(cfg, k, 1.0, 1.0, 3), Error);
  CHECK_THROWS_AS(shell_capacities(cfg, k, 1.0, 2.0, -1), Error);
  CHECK_THROWS_AS(shell_capacities(cfg, Kernel(4, 2.0), 1.0, 2.0, 3), Error);
  CHECK_THROWS_AS(shell_reduced_sum_probe(cfg, k, Point{0, 0}, 1.0, 2.0, 3), Error);
  CHECK_THROWS_AS(shell_reduced_sum_probe(cfg, k, Point{0, 0, 0}, 1.0, 0.5, 3), Error);
}

TEST_CASE("shell reports are deterministic") {
  Kernel k(3, 2.0);
  auto a = shell_capacities(lattice4(1.0, 3), k, 1.0, 2.0, 3);
  auto b = shell_capacities(lattice4(1.0, 3), k, 1.0, 2.0, 3);
  REQUIRE(a.shells.size() == b.shells.size());
  for (std::size_t i = 0; i < a.shells.size(); ++i) {
    CHECK(a.shells[i].cap.value == b.shells[i].cap.value);
    CHECK(a.shells[i].term == b.shells[i].term);
  }
  CHECK(a.total == b.total);
}
