#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "potentia/config.hpp"
#include "potentia/kernel.hpp"

namespace potentia {

struct SimParams {
  std::uint64_t paths = 10'000;
  double r_esc = 0.0;  ///< escape radius; must exceed twice the truncated reach
  std::uint64_t seed = 1;
  std::uint64_t max_steps = 200'000;
  /// Stable-walk jump scale; 0 selects 0.1 * (smallest ball radius).
  double step_scale = 0.0;
  /// Generator configs are cut off at this radius for simulation;
  /// 0 selects 10 * r_esc.  The neglected tail is not bounded.
  double truncation_radius = 0.0;
  /// Stable walk only: rerun at half step_scale on a quarter of the paths and
  /// warn when the estimates disagree beyond 3 combined standard errors.
  bool self_check = false;
};

struct HittingEstimate {
  double p_hat = 0.0;
  double std_err = 0.0;
  /// From escape radius r the chance of still hitting the enclosing ball
  /// B(x0, R_A) is at most c^2 g(r_esc)/g(R_A); truncation error is certified
  /// for Brownian paths and approximate for the discretized stable walk.
  double escape_bias_bound = 0.0;
  std::uint64_t paths = 0;
  std::uint64_t hits = 0;
  std::uint64_t unresolved = 0;  ///< ran out of steps; counted as misses
  std::uint64_t seed = 0;
  double r_esc = 0.0;
  double self_check_delta = 0.0;  ///< |p_hat - p_hat(step_scale/2)| when run
  double self_check_limit = 0.0;  ///< 3 combined standard errors when run
  std::vector<std::string> warnings;
};

/// Walk-on-spheres hitting probability for Brownian motion (alpha = 2,
/// d >= 3).  Unbiased up to the reported escape bias: every sphere jump uses
/// the exact uniform exit law.
HittingEstimate wos_hit_probability(const BallConfig& config, const Kernel& kernel,
                                    const Point& x, const SimParams& params);

/// Discrete-time isotropic alpha-stable walk (0 < alpha < 2).  A hit is a
/// landing inside a ball; trajectories that jump across a ball between
/// landings are missed, a time-discretization bias reported as a warning,
/// not bounded.
HittingEstimate stable_walk_hit_probability(const BallConfig& config, const Kernel& kernel,
                                            const Point& x, const SimParams& params);

/// Dispatch on the kernel: alpha = 2 -> walk-on-spheres, else stable walk.
HittingEstimate hit_probability(const BallConfig& config, const Kernel& kernel,
                                const Point& x, const SimParams& params);

/// Hitting estimates from start points x0 + (L, 0, ..., 0) for each L in
/// distances (increasing).  Avoidable configurations show estimates falling
/// toward 0 with L; unavoidable ones hold near 1.
std::vector<std::pair<double, HittingEstimate>> zero_one_probe(
    const BallConfig& config, const Kernel& kernel, const std::vector<double>& distances,
    const SimParams& params);

/// Worker count from POTENTIA_THREADS (default 1).  Results are bit-identical
/// for any value: paths own counter-based RNG streams and the reduction is an
/// integer sum.
int worker_thread_count();

/// One-sided stable(beta) variate with Laplace transform exp(-lambda^beta),
/// beta in (0,1): Kanter's representation.  Exposed for distribution tests.
double one_sided_stable(double beta, double theta_uniform, double exp_uniform);

}  // namespace potentia
