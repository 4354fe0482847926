#pragma once

#include <cstdint>
#include <vector>

#include "potentia/config.hpp"
#include "potentia/kernel.hpp"

namespace potentia {

/// Finite nonnegative atomic measure.
struct DiscreteMeasure {
  std::vector<Point> atoms;
  std::vector<double> weights;

  double mass() const;
};

/// G mu (x) = sum_i w_i G(x, atom_i); +inf when x coincides with an atom of
/// positive weight.
double potential(const DiscreteMeasure& mu, const Kernel& kernel, const Point& x);

/// (c0^-1 g(r)^-1, c g(r)^-1): certified lower/upper bounds for the capacity
/// of a single ball of radius r.
struct BallCapacityBounds {
  double lower = 0.0;
  double upper = 0.0;
};
BallCapacityBounds ball_capacity_bounds(const Kernel& kernel, double radius);

/// Hitting-probability sandwich for a single ball B(center, r) seen from x:
///   lower = min(1, c^-1 cap_B g(rho(x,center) + r))
///   upper = min(1, c g(rho(x,center)) / g(r)),  1 inside the ball.
struct HittingBounds {
  double lower = 0.0;
  double upper = 1.0;
};
HittingBounds hitting_bounds_ball(const Kernel& kernel, const Ball& ball, const Point& x,
                                  double cap_b);

struct GridSpec {
  std::uint64_t boundary_points = 600;  // per-ball support budget
  std::uint64_t radial_layers = 8;      // interior layering for alpha < 2
  std::uint64_t audit_refinement = 4;   // audit grid densification factor
  std::uint64_t seed = 1;               // for the random constraint samples
};

struct CapacityEstimate {
  double value = 0.0;   // LP optimum (point estimate; may exceed `upper` by
                        // the grid tolerance)
  double lower = 0.0;   // value rescaled by the audit-grid potential maximum
  double upper = 0.0;   // sum of per-ball bounds c g(r_z)^-1
  std::uint64_t support_points = 0;
  std::uint64_t constraint_points = 0;
};

/// Inner capacity of a finite union of disjoint balls as a linear program:
/// maximize total mass of a measure with atoms on a support grid in the union,
/// subject to potential <= 1 on a finer constraint grid.  Atom weights stand
/// for mass spread over the local grid patch, so kernel columns are capped at
/// the analytic patch self-potential; a 4x-finer audit grid rescales the
/// result into the certified `lower`.
CapacityEstimate capacity_lp(const std::vector<Ball>& balls, const Kernel& kernel,
                             const GridSpec& grid = {});

/// The optimal measure alongside the estimate (for diagnostics and tests).
struct CapacityResult {
  CapacityEstimate estimate;
  DiscreteMeasure measure;
  double audit_max_potential = 0.0;
};
CapacityResult capacity_lp_full(const std::vector<Ball>& balls, const Kernel& kernel,
                                const GridSpec& grid = {});

/// Outer-capacity estimate: capacity_lp of the (1+delta)-dilated balls.
CapacityEstimate outer_capacity_estimate(const std::vector<Ball>& balls, const Kernel& kernel,
                                         const GridSpec& grid = {}, double delta = 0.05);

/// One group of the comparison inequality: a ball with a pair of measures
/// supported in it, with |mu| <= |nu|.
struct ComparisonGroup {
  Ball ball;
  DiscreteMeasure mu;
  DiscreteMeasure nu;
};

struct ComparisonReport {
  bool holds = true;
  double max_violation = 0.0;  // max over probes of Gmu - (w + c^2 c_D Gnu)
  double max_ratio = 0.0;      // max over probes of Gmu / (w + c^2 c_D Gnu)
  std::uint64_t probes = 0;
};

/// Checks  G mu <= w_bound + c^2 c_D G nu  at every probe point, where
/// mu = sum mu_z, nu = sum nu_z over groups whose balls satisfy the
/// 3-separation  B(z, r_z) disjoint from B(z', 3 r_z') for z != z'.
/// Preconditions (validated): separation, mass ordering, and
/// G mu_z <= w_bound at every probe.
ComparisonReport comparison_check(const std::vector<ComparisonGroup>& groups,
                                  const Kernel& kernel, double w_bound,
                                  const std::vector<Point>& probes);

/// Certified union lower bound  epsilon (2 c^3 c_D C)^-1 sum_z c0^-1 g(r_z)^-1
/// for a 3-separated configuration with separation constant epsilon and
/// comparison constant C (= c0 for the normalized Lebesgue ball potential).
double union_capacity_lower(const std::vector<Ball>& balls, const Kernel& kernel,
                            double epsilon, double C);

// grid construction (exposed for tests and the monte carlo module)

/// Deterministic near-uniform point set on the sphere |x - center| = radius.
std::vector<Point> sphere_points(int d, const Point& center, double radius,
                                 std::uint64_t count, std::uint64_t variant = 0);

struct SupportGrid {
  std::vector<Point> points;
  std::vector<double> self_potential;  // patch self-potential cap per point
};

/// Support grid for one ball: boundary points for alpha = 2, radially graded
/// interior layers for alpha < 2 (the equilibrium measure is volumetric).
SupportGrid support_grid_for_ball(const Ball& ball, const Kernel& kernel,
                                  const GridSpec& grid);

}  // namespace potentia
