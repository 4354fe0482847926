#include "potentia/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include "potentia/errors.hpp"
#include "potentia/rng.hpp"
#include "potentia/simplex.hpp"

namespace potentia {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;

/// g(r) with the power specialized; the LP evaluates hundreds of millions of
/// kernel entries, so the generic pow() path matters.
class RadialEval {
public:
  explicit RadialEval(const Kernel& k) : a_(k.amplitude()), e_(k.alpha() - k.d()) {}

  double operator()(double r) const {
    if (r <= 0.0) return kInf;
    if (e_ == -1.0) return a_ / r;
    if (e_ == -2.0) return a_ / (r * r);
    if (e_ == -1.5) return a_ / (r * std::sqrt(r));
    if (e_ == -0.5) return a_ / std::sqrt(r);
    return a_ * std::pow(r, e_);
  }

private:
  double a_;
  double e_;
};

double dist_flat(const double* a, const double* b, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return std::sqrt(s);
}

double phase_of(std::uint64_t variant) {
  return std::fmod(0.3819660112501051 * static_cast<double>(variant + 1), 1.0);
}

}  // namespace

double DiscreteMeasure::mass() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

double potential(const DiscreteMeasure& mu, const Kernel& kernel, const Point& x) {
  if (mu.atoms.size() != mu.weights.size()) {
    throw Error(ErrorCode::invalid_argument, "potential: atoms/weights size mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < mu.atoms.size(); ++i) {
    const double w = mu.weights[i];
    if (w < 0.0) throw Error(ErrorCode::invalid_argument, "potential: negative weight");
    if (w == 0.0) continue;
    const double r = distance(mu.atoms[i], x);
    if (r == 0.0) return kInf;
    s += w * kernel.g(r);
  }
  return s;
}

BallCapacityBounds ball_capacity_bounds(const Kernel& kernel, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorCode::invalid_argument, "ball_capacity_bounds: radius must be > 0");
  }
  const double inv_g = 1.0 / kernel.g(radius);
  return {inv_g / kernel.c0(), kernel.c() * inv_g};
}

HittingBounds hitting_bounds_ball(const Kernel& kernel, const Ball& ball, const Point& x,
                                  double cap_b) {
  if (!(cap_b >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "hitting_bounds_ball: cap_b must be >= 0");
  }
  const double rho = distance(x, ball.center);
  HittingBounds hb;
  hb.lower = std::min(1.0, cap_b * kernel.g(rho + ball.radius) / kernel.c());
  if (rho <= ball.radius) {
    hb.upper = 1.0;
  } else {
    hb.upper = std::min(1.0, kernel.c() * kernel.g(rho) / kernel.g(ball.radius));
  }
  return hb;
}

// ---- grids -------------------------------------------------------------------

std::vector<Point> sphere_points(int d, const Point& center, double radius,
                                 std::uint64_t count, std::uint64_t variant) {
  if (static_cast<int>(center.size()) != d) {
    throw Error(ErrorCode::invalid_argument, "sphere_points: center dimension mismatch");
  }
  if (!(radius > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "sphere_points: radius must be > 0");
  }
  std::vector<Point> pts;
  if (d == 1) {
    pts.push_back({center[0] - radius});
    pts.push_back({center[0] + radius});
    return pts;
  }
  pts.reserve(count);
  if (d == 2) {
    const double phase = phase_of(variant);
    for (std::uint64_t i = 0; i < count; ++i) {
      const double t = 2.0 * kPi * ((static_cast<double>(i) + 0.5) / static_cast<double>(count) + phase);
      pts.push_back({center[0] + radius * std::cos(t), center[1] + radius * std::sin(t)});
    }
    return pts;
  }
  if (d == 3) {
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    const double phase = 2.0 * kPi * phase_of(variant);
    for (std::uint64_t i = 0; i < count; ++i) {
      const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(count);
      const double rxy = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double t = golden * static_cast<double>(i) + phase;
      pts.push_back({center[0] + radius * rxy * std::cos(t),
                     center[1] + radius * rxy * std::sin(t), center[2] + radius * z});
    }
    return pts;
  }
  // d >= 4: deterministic normalized Gaussian directions
  for (std::uint64_t i = 0; i < count; ++i) {
    PathRng rng(0x5bd1e995u + variant, i);
    Point p(d);
    double nrm = 0.0;
    for (int a = 0; a < d; ++a) {
      p[a] = rng.normal();
      nrm += p[a] * p[a];
    }
    nrm = std::sqrt(nrm);
    for (int a = 0; a < d; ++a) p[a] = center[a] + radius * p[a] / nrm;
    pts.push_back(std::move(p));
  }
  return pts;
}

namespace {

SupportGrid build_grid(const Ball& ball, const Kernel& kernel, std::uint64_t budget,
                       std::uint64_t layers, std::uint64_t variant) {
  const int d = kernel.d();
  const double r = ball.radius;
  SupportGrid grid;

  if (kernel.alpha() == 2.0) {
    // equilibrium measure lives on the boundary sphere
    grid.points = sphere_points(d, ball.center, r, budget, variant);
    const std::uint64_t n = grid.points.size();
    const double vd = unit_ball_volume(d);
    const double vdm1 = unit_ball_volume(d - 1);
    const double area = static_cast<double>(d) * vd * std::pow(r, d - 1);
    const double patch = area / static_cast<double>(n);
    const double h = std::pow(patch / vdm1, 1.0 / static_cast<double>(d - 1));
    const double self = static_cast<double>(d - 1) * kernel.g(h);
    grid.self_potential.assign(n, self);
    return grid;
  }

  // alpha < 2: volumetric support, layers graded toward the boundary where
  // the equilibrium density concentrates
  const std::uint64_t L = std::max<std::uint64_t>(1, layers);
  const double cluster = 2.0 / (2.0 - kernel.alpha());
  std::vector<double> u(L + 1, 0.0);
  for (std::uint64_t l = 1; l <= L; ++l) {
    u[l] = 1.0 - std::pow(static_cast<double>(L - l) / static_cast<double>(L), cluster);
  }
  std::vector<double> edge(L + 1, 1.0);
  edge[0] = 0.5 * u[1];
  for (std::uint64_t l = 1; l < L; ++l) edge[l] = 0.5 * (u[l] + u[l + 1]);

  std::vector<std::uint64_t> n_layer(L + 1, 0);
  double weight_sum = 0.0;
  for (std::uint64_t l = 1; l <= L; ++l) weight_sum += std::pow(u[l], d - 1);
  for (std::uint64_t l = 1; l <= L; ++l) {
    n_layer[l] = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(std::llround(static_cast<double>(budget) *
                                                   std::pow(u[l], d - 1) / weight_sum)));
  }

  const double vd = unit_ball_volume(d);
  const double c0 = kernel.c0();

  // center point; its cell is the inner sphere of radius r*edge[0]
  grid.points.push_back(ball.center);
  grid.self_potential.push_back(c0 * kernel.g(std::max(r * edge[0], 1e-300)));

  for (std::uint64_t l = 1; l <= L; ++l) {
    const double shell_vol =
        vd * std::pow(r, d) * (std::pow(edge[l], d) - std::pow(edge[l - 1], d));
    const double cell_vol = shell_vol / static_cast<double>(n_layer[l]);
    const double h = std::pow(cell_vol / vd, 1.0 / static_cast<double>(d));
    const double self = c0 * kernel.g(h);
    auto pts = sphere_points(d, ball.center, r * u[l], n_layer[l], variant + 7 * l);
    for (auto& p : pts) {
      grid.points.push_back(std::move(p));
      grid.self_potential.push_back(self);
    }
  }
  return grid;
}

}  // namespace

SupportGrid support_grid_for_ball(const Ball& ball, const Kernel& kernel,
                                  const GridSpec& grid) {
  return build_grid(ball, kernel, grid.boundary_points, grid.radial_layers, 0);
}

// ---- capacity LP -------------------------------------------------------------

CapacityResult capacity_lp_full(const std::vector<Ball>& balls, const Kernel& kernel,
                                const GridSpec& gspec) {
  const int d = kernel.d();
  for (std::size_t i = 0; i < balls.size(); ++i) {
    if (static_cast<int>(balls[i].center.size()) != d) {
      throw Error(ErrorCode::scene_dimension,
                  "capacity_lp: ball " + std::to_string(i) + " dimension mismatch");
    }
    if (!(balls[i].radius > 0.0) || !std::isfinite(balls[i].radius)) {
      throw Error(ErrorCode::invalid_configuration,
                  "capacity_lp: ball " + std::to_string(i) + " has degenerate radius");
    }
  }

  CapacityResult result;
  if (balls.empty()) return result;

  const RadialEval radial(kernel);

  // support grid: per-ball patches with analytic self-potential caps
  std::vector<double> sp;       // flat n x d
  std::vector<double> selfpot;  // n
  for (const Ball& b : balls) {
    SupportGrid g = build_grid(b, kernel, gspec.boundary_points, gspec.radial_layers, 0);
    for (std::size_t i = 0; i < g.points.size(); ++i) {
      sp.insert(sp.end(), g.points[i].begin(), g.points[i].end());
      selfpot.push_back(g.self_potential[i]);
    }
  }
  const std::size_t n = selfpot.size();

  // a weight at support point i stands for mass on its patch, so its column is
  // the kernel capped at the patch self-potential
  auto entry = [&](const double* x, std::size_t i) {
    const double v = radial(dist_flat(x, &sp[i * d], d));
    return std::min(v, selfpot[i]);
  };

  // constraint grid: the support points themselves, a denser offset grid, and
  // random points inside each ball
  std::vector<double> cp = sp;
  for (std::size_t bi = 0; bi < balls.size(); ++bi) {
    SupportGrid g =
        build_grid(balls[bi], kernel, 2 * gspec.boundary_points, 2 * gspec.radial_layers, 1);
    for (const auto& p : g.points) cp.insert(cp.end(), p.begin(), p.end());
  }
  for (std::size_t bi = 0; bi < balls.size(); ++bi) {
    const Ball& b = balls[bi];
    PathRng rng(gspec.seed, 0x100 + bi);
    const std::uint64_t n_random = 10 * gspec.boundary_points;
    for (std::uint64_t t = 0; t < n_random; ++t) {
      Point y(d);
      double nrm = 0.0;
      for (int a = 0; a < d; ++a) {
        y[a] = rng.normal();
        nrm += y[a] * y[a];
      }
      nrm = std::sqrt(nrm);
      // half on the boundary sphere, half uniform in the ball
      const double radialpos =
          (t % 2 == 0) ? b.radius
                       : b.radius * std::pow(rng.uniform_pos(), 1.0 / static_cast<double>(d));
      for (int a = 0; a < d; ++a) y[a] = b.center[a] + y[a] / nrm * radialpos;
      cp.insert(cp.end(), y.begin(), y.end());
    }
  }
  const std::size_t m = cp.size() / d;

  // working-set LP: start from the support-point constraints, append the most
  // violated rows until the whole constraint grid is satisfied
  SimplexSolver solver(std::vector<double>(n, 1.0));
  std::vector<char> in_working(m, 0);
  std::vector<double> row(n);
  auto add_constraint = [&](std::size_t j) {
    const double* x = &cp[j * d];
    for (std::size_t i = 0; i < n; ++i) row[i] = entry(x, i);
    solver.add_row(row.data(), 1.0);
    in_working[j] = 1;
  };
  for (std::size_t j = 0; j < n; ++j) add_constraint(j);  // support points come first

  SimplexSolution sol = solver.solve();
  std::vector<double> w = sol.x;

  auto potential_at = [&](const double* x) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (w[i] != 0.0) s += w[i] * entry(x, i);
    }
    return s;
  };

  const int max_rounds = 60;
  const std::size_t batch = 256;
  for (int round = 0; round < max_rounds; ++round) {
    std::vector<std::pair<double, std::size_t>> violations;
    for (std::size_t j = 0; j < m; ++j) {
      if (in_working[j]) continue;
      const double pot = potential_at(&cp[j * d]);
      if (pot > 1.0 + 1e-7) violations.emplace_back(-pot, j);  // sort: worst first
    }
    if (violations.empty()) break;
    std::sort(violations.begin(), violations.end());
    const std::size_t take = std::min(batch, violations.size());
    for (std::size_t t = 0; t < take; ++t) add_constraint(violations[t].second);
    sol = solver.solve();
    w = sol.x;
  }

  const double value = std::accumulate(w.begin(), w.end(), 0.0);

  // audit: evaluate the optimal potential on a finer grid and rescale the
  // certified mass by the observed maximum
  double audit_max = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    audit_max = std::max(audit_max, potential_at(&cp[j * d]));
  }
  const std::uint64_t refine = std::max<std::uint64_t>(2, gspec.audit_refinement);
  for (std::size_t bi = 0; bi < balls.size(); ++bi) {
    SupportGrid g = build_grid(balls[bi], kernel, refine * gspec.boundary_points,
                               refine * gspec.radial_layers, 2);
    for (const auto& p : g.points) audit_max = std::max(audit_max, potential_at(p.data()));
    const Ball& b = balls[bi];
    PathRng rng(gspec.seed, 0x9000 + bi);
    for (std::uint64_t t = 0; t < refine * gspec.boundary_points; ++t) {
      Point y(d);
      double nrm = 0.0;
      for (int a = 0; a < d; ++a) {
        y[a] = rng.normal();
        nrm += y[a] * y[a];
      }
      nrm = std::sqrt(nrm);
      const double radialpos =
          (t % 2 == 0) ? b.radius
                       : b.radius * std::pow(rng.uniform_pos(), 1.0 / static_cast<double>(d));
      for (int a = 0; a < d; ++a) y[a] = b.center[a] + y[a] / nrm * radialpos;
      audit_max = std::max(audit_max, potential_at(y.data()));
    }
  }

  double upper = 0.0;
  for (const Ball& b : balls) upper += kernel.c() / kernel.g(b.radius);

  result.audit_max_potential = audit_max;
  result.estimate.value = value;
  result.estimate.lower = value / std::max(1.0, audit_max);
  result.estimate.upper = upper;
  result.estimate.support_points = n;
  result.estimate.constraint_points = m;
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] > 0.0) {
      result.measure.atoms.emplace_back(sp.begin() + i * d, sp.begin() + (i + 1) * d);
      result.measure.weights.push_back(w[i]);
    }
  }
  return result;
}

CapacityEstimate capacity_lp(const std::vector<Ball>& balls, const Kernel& kernel,
                             const GridSpec& grid) {
  return capacity_lp_full(balls, kernel, grid).estimate;
}

CapacityEstimate outer_capacity_estimate(const std::vector<Ball>& balls, const Kernel& kernel,
                                         const GridSpec& grid, double delta) {
  if (!(delta > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "outer_capacity_estimate: delta must be > 0");
  }
  std::vector<Ball> dilated = balls;
  for (Ball& b : dilated) b.radius *= 1.0 + delta;
  return capacity_lp(dilated, kernel, grid);
}

// ---- comparison and union bound ---------------------------------------------

ComparisonReport comparison_check(const std::vector<ComparisonGroup>& groups,
                                  const Kernel& kernel, double w_bound,
                                  const std::vector<Point>& probes) {
  if (groups.empty()) {
    throw Error(ErrorCode::invalid_configuration, "comparison_check: no groups");
  }
  if (!(w_bound >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "comparison_check: w_bound must be >= 0");
  }
  const double slack = 1e-12;
  for (std::size_t a = 0; a < groups.size(); ++a) {
    const ComparisonGroup& ga = groups[a];
    if (!(ga.ball.radius > 0.0)) {
      throw Error(ErrorCode::invalid_configuration, "comparison_check: degenerate ball");
    }
    if (ga.mu.mass() > ga.nu.mass() + slack) {
      throw Error(ErrorCode::invalid_configuration,
                  "comparison_check: |mu| > |nu| in group " + std::to_string(a));
    }
    for (const auto& atom : ga.mu.atoms) {
      if (distance(atom, ga.ball.center) > ga.ball.radius + slack) {
        throw Error(ErrorCode::invalid_configuration,
                    "comparison_check: mu atom outside ball " + std::to_string(a));
      }
    }
    for (const auto& atom : ga.nu.atoms) {
      if (distance(atom, ga.ball.center) > ga.ball.radius + slack) {
        throw Error(ErrorCode::invalid_configuration,
                    "comparison_check: nu atom outside ball " + std::to_string(a));
      }
    }
    for (std::size_t b = 0; b < groups.size(); ++b) {
      if (b == a) continue;
      const double dist = distance(ga.ball.center, groups[b].ball.center);
      if (dist <= ga.ball.radius + 3.0 * groups[b].ball.radius) {
        throw Error(ErrorCode::invalid_configuration,
                    "comparison_check: groups " + std::to_string(a) + " and " +
                        std::to_string(b) + " violate 3-separation");
      }
    }
  }

  const double cc = kernel.c() * kernel.c() * kernel.doubling_constant();
  ComparisonReport report;
  report.probes = probes.size();
  for (const Point& x : probes) {
    double gmu = 0.0;
    double gnu = 0.0;
    for (const ComparisonGroup& g : groups) {
      const double pz = potential(g.mu, kernel, x);
      if (pz > w_bound * (1.0 + slack) && std::isfinite(pz)) {
        throw Error(ErrorCode::invalid_configuration,
                    "comparison_check: G mu_z exceeds w_bound at a probe");
      }
      gmu += pz;
      gnu += potential(g.nu, kernel, x);
    }
    const double rhs = w_bound + cc * gnu;
    if (std::isinf(gmu) && std::isinf(rhs)) continue;  // shared atom: both infinite
    const double violation = gmu - rhs;
    report.max_violation = std::max(report.max_violation, violation);
    if (rhs > 0.0) report.max_ratio = std::max(report.max_ratio, gmu / rhs);
  }
  report.holds = report.max_violation <= 1e-9;
  return report;
}

double union_capacity_lower(const std::vector<Ball>& balls, const Kernel& kernel,
                            double epsilon, double C) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::invalid_argument, "union_capacity_lower: epsilon must be > 0");
  }
  if (!(C >= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "union_capacity_lower: C must be >= 1");
  }
  for (std::size_t i = 0; i < balls.size(); ++i) {
    for (std::size_t j = i + 1; j < balls.size(); ++j) {
      const double dist = distance(balls[i].center, balls[j].center);
      if (dist <= 3.0 * (balls[i].radius + balls[j].radius)) {
        throw Error(ErrorCode::invalid_configuration,
                    "union_capacity_lower: tripled balls " + std::to_string(i) + " and " +
                        std::to_string(j) + " are not disjoint");
      }
    }
  }
  double sum_lower = 0.0;
  for (const Ball& b : balls) sum_lower += ball_capacity_bounds(kernel, b.radius).lower;
  const double c = kernel.c();
  return epsilon / (2.0 * c * c * c * kernel.doubling_constant() * C) * sum_lower;
}

}  // namespace potentia
