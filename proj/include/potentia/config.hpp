#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "potentia/kernel.hpp"
#include "potentia/verdict.hpp"

namespace potentia {

struct Ball {
  Point center;
  double radius = 0.0;
};

/// Radius envelope phi(rho) = c * rho^(-beta), nonincreasing for beta >= 0.
struct RadiusLaw {
  double c = 1.0;
  double beta = 0.0;

  double operator()(double rho) const;
};

/// Lattice generator: centers on (spacing * Z^d) + x0, excluding x0 itself,
/// kept while |z - x0| < spacing * 2^n_max, radius r_z = phi(|z - x0|).
struct GeneratorSpec {
  double spacing = 1.0;
  RadiusLaw phi;
  int n_max = 0;
};

/// A countable configuration of pairwise disjoint closed balls around a
/// reference point x0, given either explicitly or through a lattice generator.
/// Generator-backed configs are enumerated lazily; materialization is capped.
class BallConfig {
public:
  static BallConfig explicit_config(Point x0, std::vector<Ball> balls);
  static BallConfig lattice_config(Point x0, GeneratorSpec spec);

  int dimension() const { return static_cast<int>(x0_.size()); }
  const Point& x0() const { return x0_; }
  bool has_generator() const { return generator_.has_value(); }
  const std::optional<GeneratorSpec>& generator() const { return generator_; }

  /// Number of balls (explicit count, or the generator's materialized count).
  std::uint64_t ball_count() const;

  /// Largest |z - x0| + r_z over the configuration.
  double reach() const;

  /// Largest k such that the dilated balls B(z, k*r_z) are pairwise disjoint
  /// (min over pairs of |z-z'| / (r_z + r_z'); +inf for fewer than two balls).
  double disjointness_factor() const;

  /// Visit every ball with |center - x0| in [inner, outer); deterministic
  /// lexicographic order for generators.  Returns the number visited.
  std::uint64_t for_each_in_shell(double inner, double outer,
                                  const std::function<void(const Ball&)>& fn) const;
  std::uint64_t for_each(const std::function<void(const Ball&)>& fn) const;

  /// Materialize to a ball vector; throws if the count exceeds max_balls.
  std::vector<Ball> materialize(std::uint64_t max_balls = 1'000'000) const;

  /// Smallest center distance from x0 to any ball (spacing for lattices).
  double min_center_distance() const;

  /// Nearest-neighbor center distance for a lattice (= spacing); for explicit
  /// configs the minimum over pairs.
  double nearest_center_spacing() const;

  const std::vector<Ball>& explicit_balls() const;

private:
  BallConfig() = default;
  void validate_explicit() const;
  void validate_generator() const;

  Point x0_;
  std::vector<Ball> balls_;  // explicit storage (empty for generators)
  std::optional<GeneratorSpec> generator_;
};

/// Infimum over ordered pairs z != z' of
///   [ lambda(B(z, rho(z,z')/4)) / lambda(B(x0, 4 rho(x0,z))) ] * g(r_z)/g(rho(x0,z))
/// = (rho(z,z') / (16 rho(x0,z)))^d * g(r_z)/g(rho(x0,z)).
/// A positive infimum uniformly ties each ball's size and spacing to its
/// distance from x0.  For a lattice the minimizing z' of a fixed z is a
/// nearest neighbor, which gives an exact O(N) path; explicit configs use the
/// brute-force pair scan.
double separation_infimum(const BallConfig& config, const Kernel& kernel);

struct RegularityReport {
  bool regular = false;
  double min_center_gap = 0.0;     // epsilon: smallest pairwise center distance
  double covering_radius = 0.0;    // R used by the covering probe
  std::uint64_t probes_tried = 0;
  std::uint64_t probes_failed = 0;
  std::string failure;             // names the first offending ball if any
};

/// Checks regular location: centers epsilon-separated, every sampled ball of
/// radius R near the configuration contains a center, and all radii lie
/// strictly between phi and C*phi.  Generator configs check against their own
/// envelope scaled to the geometric midpoint (r = sqrt(C)*phi); explicit
/// configs require a user-supplied envelope.
RegularityReport regularity_check(const BallConfig& config, double C,
                                  const std::optional<RadiusLaw>& user_phi = std::nullopt,
                                  std::uint64_t covering_probes = 512,
                                  std::uint64_t seed = 7);

struct CriterionShell {
  int n = 0;                 // shell S(x0, 2^n, 2^(n+1))
  std::uint64_t ball_count = 0;
  double term = 0.0;         // sum over shell balls of g(rho(x0,z)) / g(r_z)
  double partial_sum = 0.0;
};

struct CriterionSeries {
  std::vector<CriterionShell> shells;
  double total = 0.0;
};

/// Per-ball series sum g(rho(x0,z))/g(r_z) grouped by dyadic shell of the
/// center (balls straddling a shell boundary count by center).  Divergence of
/// this series is the closed-form unavoidability criterion for regularly
/// located configurations.
CriterionSeries criterion_series(const BallConfig& config, const Kernel& kernel,
                                 int n_min = 0, int n_max = -1);

/// Closed-form classification of the power-law family r_z = c|z-x0|^(-beta) on
/// a lattice: unavoidable iff (1+beta)(d-alpha) <= d (the shell terms grow
/// like 2^(n*(d - (1+beta)(d-alpha)))).
Verdict powerlaw_classifier(int d, double alpha, double beta);

/// Shell-sum growth exponent d - (1+beta)(d-alpha) used by the classifier.
double powerlaw_exponent(int d, double alpha, double beta);

struct MvSample {
  double r = 0.0;
  double h = 0.0;  // lambda(B(x0,r)) * g(r) / g(phi(r))
};

struct MvReport {
  bool holds = false;       // limsup h > 0 (closed form: exponent >= 0)
  double exponent = 0.0;    // h(r) ~ r^exponent for the power law
  std::vector<MvSample> samples;
};

/// Measure-volume growth condition for a generator config: evaluates
/// h(r) = lambda(B(x0,r)) g(r)/g(phi(r)) at sample radii and reports the
/// closed-form exponent d + (alpha-d)(1+beta).
MvReport mv_condition(const BallConfig& config, const Kernel& kernel,
                      const std::vector<double>& r_samples);

/// Volume of the unit ball in R^d.
double unit_ball_volume(int d);

}  // namespace potentia
