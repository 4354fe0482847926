#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "potentia/capacity.hpp"
#include "potentia/config.hpp"
#include "potentia/kernel.hpp"
#include "potentia/verdict.hpp"

namespace potentia {

/// One shell S(x0, gamma^n R, gamma^(n+1) R) of the series
///   sum_n g(gamma^n R) * cap(A intersect shell_n),
/// which diverges exactly when the configuration is unavoidable.
struct ShellRow {
  int n = 0;
  double inner_radius = 0.0;
  double outer_radius = 0.0;
  std::uint64_t ball_count = 0;
  CapacityEstimate cap;
  bool fast_path = false;  ///< capacity bracketed from per-ball bounds, no LP
  double term = 0.0;       ///< g(gamma^n R) * cap.value
  double partial_sum = 0.0;
};

struct SeriesReport {
  double gamma = 2.0;
  double R = 1.0;
  /// True when the shells cover the entire configuration (explicit configs
  /// whose reach fits under the last shell).  Generator configs stand for
  /// infinite objects truncated for computation, so their reports are never
  /// complete and trailing empty shells carry no evidence.
  bool complete = false;
  std::vector<ShellRow> shells;
  double total = 0.0;
};

struct ShellOptions {
  GridSpec grid;                     ///< LP budget, split across a shell's balls
  std::uint64_t lp_max_balls = 64;   ///< larger shells use the bounds fast path
  double comparison_constant = 0.0;  ///< C in the union lower bound; 0 = kernel c0
};

/// Decompose the configuration into dyadic-type shells and estimate each
/// shell's capacity: a linear program for small shells, certified per-ball
/// bracket sums for large ones (valid for 3-separated balls).  Shell terms
/// and partial sums form the divergence evidence consumed by classify().
SeriesReport shell_capacities(const BallConfig& config, const Kernel& kernel, double R,
                              double gamma, int n_max, const ShellOptions& options = {});

/// Truncation heuristic: growth of the last K=4 shell terms above 1e-6 reads
/// as divergence; a geometric tail ratio <= 0.75 reads as convergence; an
/// identically small tail of a complete report is convergence; anything else
/// is Inconclusive.  A closed-form verdict, when supplied, is authoritative.
Verdict classify(const SeriesReport& report,
                 const std::optional<Verdict>& closed_form = std::nullopt);

/// Sum over shells of per-ball hitting-probability upper bounds at x: a
/// computable surrogate for the shell sums of reduced functions.  Evidence
/// only — every addend is a bound, not an evaluation.
double shell_reduced_sum_probe(const BallConfig& config, const Kernel& kernel,
                               const Point& x, double R, double gamma, int n_max);

}  // namespace potentia
