#include "potentia/wiener.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "potentia/errors.hpp"

namespace potentia {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double separation_term(const Kernel& kernel, double nn, double rho, double radius) {
  return std::pow(nn / (16.0 * rho), kernel.d()) * kernel.g(radius) / kernel.g(rho);
}

}  // namespace

SeriesReport shell_capacities(const BallConfig& config, const Kernel& kernel, double R,
                              double gamma, int n_max, const ShellOptions& options) {
  if (config.dimension() != kernel.d()) {
    throw Error(ErrorCode::scene_dimension, "shell_capacities: config/kernel dimension mismatch");
  }
  if (!(R > 0.0) || !std::isfinite(R)) {
    throw Error(ErrorCode::invalid_argument, "shell_capacities: R must be > 0");
  }
  if (!(gamma > 1.0) || !std::isfinite(gamma)) {
    throw Error(ErrorCode::invalid_argument, "shell_capacities: gamma must be > 1");
  }
  if (n_max < 0) {
    throw Error(ErrorCode::invalid_argument, "shell_capacities: n_max must be >= 0");
  }

  const double c = kernel.c();
  const double c0 = kernel.c0();
  const double cd = kernel.doubling_constant();
  const double C = options.comparison_constant > 0.0 ? options.comparison_constant : c0;
  const Point& x0 = config.x0();
  const double lattice_nn =
      config.has_generator() ? config.nearest_center_spacing() : 0.0;

  SeriesReport report;
  report.gamma = gamma;
  report.R = R;

  double running = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    ShellRow row;
    row.n = n;
    row.inner_radius = R * std::pow(gamma, n);
    row.outer_radius = R * std::pow(gamma, n + 1);

    // one streaming pass: bracket sums, extremes, and (for small shells) the
    // materialized balls for the LP path
    std::vector<Ball> shell_balls;
    double sum_upper = 0.0;   // sum over balls of c / g(r_z)
    double sum_lower = 0.0;   // sum over balls of 1 / (c0 g(r_z))
    double min_rho = kInf, max_rho = 0.0;
    double r_at_min_rho = 0.0, r_at_max_rho = 0.0;
    double max_r = 0.0, hull = 0.0;
    row.ball_count = config.for_each_in_shell(
        row.inner_radius, row.outer_radius, [&](const Ball& b) {
          const double rho = distance(b.center, x0);
          const double inv_g = 1.0 / kernel.g(b.radius);
          sum_upper += c * inv_g;
          sum_lower += inv_g / c0;
          if (rho < min_rho) {
            min_rho = rho;
            r_at_min_rho = b.radius;
          }
          if (rho > max_rho) {
            max_rho = rho;
            r_at_max_rho = b.radius;
          }
          max_r = std::max(max_r, b.radius);
          hull = std::max(hull, rho + b.radius);
          if (shell_balls.size() <= options.lp_max_balls) shell_balls.push_back(b);
        });

    if (row.ball_count == 0) {
      report.shells.push_back(row);
      continue;
    }

    const double hull_upper = c / kernel.g(hull);  // shell fits inside B(x0, hull)
    if (row.ball_count <= options.lp_max_balls) {
      GridSpec g = options.grid;
      g.boundary_points = std::max<std::uint64_t>(
          24, options.grid.boundary_points / row.ball_count);
      row.cap = capacity_lp(shell_balls, kernel, g);
      row.cap.upper = std::min(row.cap.upper, hull_upper);
    } else {
      row.fast_path = true;
      row.cap.value = std::min(sum_upper, hull_upper);
      row.cap.upper = std::min(sum_upper, hull_upper);
      double lower = 1.0 / (c0 * kernel.g(max_r));  // monotonicity: best single ball
      // union bound for a 3-separated shell, with the shell's own separation
      // infimum; the lattice term is monotone in rho, so the extremes suffice
      const double nn = config.has_generator()
                            ? lattice_nn
                            : std::numeric_limits<double>::quiet_NaN();
      if (config.has_generator() && row.ball_count >= 2 && nn > 6.0 * max_r) {
        const double eps = std::min(separation_term(kernel, nn, min_rho, r_at_min_rho),
                                    separation_term(kernel, nn, max_rho, r_at_max_rho));
        lower = std::max(lower, eps / (2.0 * c * c * c * cd * C) * sum_lower);
      }
      row.cap.lower = std::min(lower, row.cap.value);
    }

    row.term = kernel.g(row.inner_radius) * row.cap.value;
    running += row.term;
    row.partial_sum = running;
    report.shells.push_back(row);
  }

  report.total = running;
  report.complete = !config.has_generator() && report.shells.size() > 0 &&
                    config.reach() <= report.shells.back().outer_radius;
  return report;
}

Verdict classify(const SeriesReport& report, const std::optional<Verdict>& closed_form) {
  if (report.shells.size() < 4) {
    throw Error(ErrorCode::invalid_configuration, "classify: need at least 4 shells");
  }
  if (closed_form) {
    Verdict v = *closed_form;
    v.rationale = "closed-form rule: " + closed_form->rationale;
    v.closed_form = true;
    return v;
  }

  constexpr std::size_t K = 4;
  constexpr double delta = 1e-6;
  constexpr double ratio_max = 0.75;
  constexpr double growth_min = 0.95;  // tolerance for "non-decreasing on average"

  // trailing empty shells of a truncated report are artifacts, not evidence
  std::size_t end = report.shells.size();
  if (!report.complete) {
    while (end > 0 && report.shells[end - 1].ball_count == 0) --end;
  }
  if (end == 0) {
    return {VerdictKind::Avoidable, "series convergence: no occupied shells", false};
  }
  if (end < K) {
    return {VerdictKind::Inconclusive, "insufficient data: fewer than 4 usable shells",
            false};
  }

  double t[K];
  for (std::size_t i = 0; i < K; ++i) t[i] = report.shells[end - K + i].term;

  bool all_above = true, all_below = true;
  for (double v : t) {
    all_above = all_above && v >= delta;
    all_below = all_below && v <= delta;
  }
  if (all_above) {
    const double mean_ratio = std::cbrt(t[K - 1] / t[0]);
    if (mean_ratio >= growth_min) {
      return {VerdictKind::Unavoidable, "series growth: last shell terms sustained",
              false};
    }
  }
  if (all_below) {
    return {VerdictKind::Avoidable, "series convergence: tail below threshold", false};
  }
  bool geometric = true;
  for (std::size_t i = 0; i + 1 < K; ++i) {
    geometric = geometric && t[i] > 0.0 && t[i + 1] / t[i] <= ratio_max;
  }
  if (geometric) {
    return {VerdictKind::Avoidable,
            "series convergence: geometric tail bound, ratio <= 0.75", false};
  }
  return {VerdictKind::Inconclusive, "insufficient data: tail neither sustained nor decaying",
          false};
}

double shell_reduced_sum_probe(const BallConfig& config, const Kernel& kernel,
                               const Point& x, double R, double gamma, int n_max) {
  if (static_cast<int>(x.size()) != kernel.d()) {
    throw Error(ErrorCode::invalid_argument, "shell_reduced_sum_probe: point dimension");
  }
  if (!(R > 0.0) || !(gamma > 1.0) || n_max < 0) {
    throw Error(ErrorCode::invalid_argument, "shell_reduced_sum_probe: bad shell sequence");
  }
  double total = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    const double inner = R * std::pow(gamma, n);
    const double outer = R * std::pow(gamma, n + 1);
    config.for_each_in_shell(inner, outer, [&](const Ball& b) {
      const double rho = distance(x, b.center);
      if (rho <= b.radius) {
        total += 1.0;
      } else {
        total += std::min(1.0, kernel.c() * kernel.g(rho) / kernel.g(b.radius));
      }
    });
  }
  return total;
}

}  // namespace potentia
