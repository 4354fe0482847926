#include "potentia/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

#include "potentia/errors.hpp"
#include "potentia/rng.hpp"

namespace potentia {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;

/// Ball-set geometry queries for the samplers.  Generator configs are cut off
/// at the simulation truncation radius; lattice queries touch only the 3^d
/// neighbor cube plus analytic bounds, so each step is O(1) in the ball count.
struct SceneOracle {
  int d = 0;
  Point x0;
  // explicit storage
  std::vector<double> centers;  // flat n*d
  std::vector<double> radii;
  // lattice generator
  bool lattice = false;
  double spacing = 0.0;
  RadiusLaw phi{1.0, 0.0};
  std::int64_t trunc_ksq = 0;  // sites kept iff 0 < |k|^2 <= trunc_ksq
  // summary geometry
  bool empty = true;
  double reach = 0.0;  // upper bound on max rho_z + r_z over kept balls
  double rmax = 0.0;
  double rmin = 0.0;

  struct Near {
    double surface;  // lower bound on distance to the union's surface (exact
                     // whenever small); negative inside a ball
    double radius;   // radius of the nearest ball when surface is exact
  };

  double dist_x0(const double* x) const {
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
      const double t = x[i] - x0[i];
      s += t * t;
    }
    return std::sqrt(s);
  }

  Near near(const double* x) const {
    if (empty) return {kInf, 1.0};
    if (!lattice) {
      double best = kInf, best_r = 1.0;
      const std::size_t n = radii.size();
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (int a = 0; a < d; ++a) {
          const double t = x[a] - centers[i * d + a];
          s += t * t;
        }
        const double sd = std::sqrt(s) - radii[i];
        if (sd < best) {
          best = sd;
          best_r = radii[i];
        }
      }
      return {best, best_r};
    }
    // lattice: every site with center distance < 1.5*spacing lies in the
    // [-1,1]^d cube around the rounded lattice coordinates, so the cube scan
    // is exact below that range and the analytic bounds cover the rest
    std::int64_t k0[16];
    double y[16];
    for (int i = 0; i < d; ++i) {
      y[i] = (x[i] - x0[i]) / spacing;
      k0[i] = std::llround(y[i]);
    }
    double best = kInf, best_r = rmax > 0.0 ? rmax : 1.0;
    std::int64_t off[16];
    for (int i = 0; i < d; ++i) off[i] = -1;
    for (;;) {
      std::int64_t ksq = 0;
      double s = 0.0;
      for (int i = 0; i < d; ++i) {
        const std::int64_t k = k0[i] + off[i];
        ksq += k * k;
        const double t = (y[i] - static_cast<double>(k)) * spacing;
        s += t * t;
      }
      if (ksq > 0 && ksq <= trunc_ksq) {
        const double rho = spacing * std::sqrt(static_cast<double>(ksq));
        const double r = phi(rho);
        const double sd = std::sqrt(s) - r;
        if (sd < best) {
          best = sd;
          best_r = r;
        }
      }
      int i = 0;
      while (i < d && off[i] == 1) off[i++] = -1;
      if (i == d) break;
      ++off[i];
    }
    const double outside_lb = 1.5 * spacing - rmax;
    const double far_lb = dist_x0(x) - reach;
    const double lb = std::max(far_lb, std::min(best, outside_lb));
    return {lb, best <= outside_lb ? best_r : (rmax > 0.0 ? rmax : 1.0)};
  }

  bool inside(const double* x) const {
    if (empty) return false;
    if (!lattice) {
      const std::size_t n = radii.size();
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (int a = 0; a < d; ++a) {
          const double t = x[a] - centers[i * d + a];
          s += t * t;
        }
        if (s <= radii[i] * radii[i]) return true;
      }
      return false;
    }
    // radii are below spacing/2, so only the rounded site can contain x
    std::int64_t ksq = 0;
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
      const double y = (x[i] - x0[i]) / spacing;
      const std::int64_t k = std::llround(y);
      ksq += k * k;
      const double t = (y - static_cast<double>(k)) * spacing;
      s += t * t;
    }
    if (ksq == 0 || ksq > trunc_ksq) return false;
    const double r = phi(spacing * std::sqrt(static_cast<double>(ksq)));
    return s <= r * r;
  }
};

SceneOracle build_oracle(const BallConfig& config, double truncation_radius) {
  SceneOracle o;
  o.d = config.dimension();
  o.x0 = config.x0();
  if (!config.has_generator()) {
    const auto& balls = config.explicit_balls();
    o.rmin = kInf;
    for (const Ball& b : balls) {
      o.centers.insert(o.centers.end(), b.center.begin(), b.center.end());
      o.radii.push_back(b.radius);
      o.rmax = std::max(o.rmax, b.radius);
      o.rmin = std::min(o.rmin, b.radius);
    }
    o.empty = balls.empty();
    o.reach = config.reach();
    if (o.empty) o.rmin = 0.0;
    return o;
  }
  const GeneratorSpec& g = *config.generator();
  o.lattice = true;
  o.spacing = g.spacing;
  o.phi = g.phi;
  std::int64_t gen_ksq = 1;
  for (int i = 0; i < g.n_max; ++i) gen_ksq *= 4;
  gen_ksq -= 1;  // generator ball is open: |k|^2 < 4^n_max
  const double q = truncation_radius / g.spacing;
  const double qsq = q * q * (1.0 + 1e-12);
  std::int64_t sim_ksq =
      qsq >= static_cast<double>(gen_ksq) ? gen_ksq
                                          : static_cast<std::int64_t>(std::floor(qsq));
  o.trunc_ksq = std::min(gen_ksq, sim_ksq);
  o.empty = o.trunc_ksq < 1;
  if (!o.empty) {
    const double rho_max = g.spacing * std::sqrt(static_cast<double>(o.trunc_ksq));
    o.rmax = g.phi(g.spacing);  // radius law is non-increasing in rho
    o.rmin = g.phi(rho_max);
    o.reach = rho_max + o.rmax;
  }
  return o;
}

enum class Outcome { hit, miss, unresolved };

struct Tally {
  std::uint64_t hits = 0;
  std::uint64_t unresolved = 0;
};

template <typename PathFn>
Tally run_paths(std::uint64_t paths, const PathFn& path_fn) {
  const int threads = worker_thread_count();
  auto chunk = [&](std::uint64_t lo, std::uint64_t hi, Tally* out) {
    Tally t;
    for (std::uint64_t i = lo; i < hi; ++i) {
      switch (path_fn(i)) {
        case Outcome::hit: ++t.hits; break;
        case Outcome::unresolved: ++t.unresolved; break;
        case Outcome::miss: break;
      }
    }
    *out = t;
  };
  if (threads <= 1 || paths < 256) {
    Tally t;
    chunk(0, paths, &t);
    return t;
  }
  const std::uint64_t T = static_cast<std::uint64_t>(threads);
  std::vector<Tally> parts(T);
  std::vector<std::thread> pool;
  pool.reserve(T);
  for (std::uint64_t t = 0; t < T; ++t) {
    pool.emplace_back(chunk, paths * t / T, paths * (t + 1) / T, &parts[t]);
  }
  for (auto& th : pool) th.join();
  Tally total;  // integer reduction: identical for any thread count
  for (const Tally& p : parts) {
    total.hits += p.hits;
    total.unresolved += p.unresolved;
  }
  return total;
}

void validate_common(const BallConfig& config, const Kernel& kernel, const Point& x,
                     const SimParams& params, const SceneOracle& oracle) {
  if (config.dimension() != kernel.d()) {
    throw Error(ErrorCode::scene_dimension, "simulate: config/kernel dimension mismatch");
  }
  if (kernel.d() > 16) {
    throw Error(ErrorCode::invalid_argument, "simulate: dimension capped at 16");
  }
  if (static_cast<int>(x.size()) != kernel.d()) {
    throw Error(ErrorCode::invalid_argument, "simulate: start point dimension mismatch");
  }
  if (params.paths < 1) {
    throw Error(ErrorCode::invalid_argument, "simulate: paths must be >= 1");
  }
  if (params.max_steps < 1) {
    throw Error(ErrorCode::invalid_argument, "simulate: max_steps must be >= 1");
  }
  if (!(params.r_esc > 0.0) || !std::isfinite(params.r_esc)) {
    throw Error(ErrorCode::invalid_argument, "simulate: r_esc must be positive and finite");
  }
  if (!oracle.empty && params.r_esc <= 2.0 * oracle.reach) {
    throw Error(ErrorCode::invalid_argument,
                "simulate: r_esc too small, must exceed twice the truncated reach (" +
                    std::to_string(oracle.reach) + ")");
  }
}

HittingEstimate finalize(const SimParams& params, const Kernel& kernel,
                         const SceneOracle& oracle, const Tally& tally) {
  HittingEstimate est;
  est.paths = params.paths;
  est.hits = tally.hits;
  est.unresolved = tally.unresolved;
  est.seed = params.seed;
  est.r_esc = params.r_esc;
  est.p_hat = static_cast<double>(tally.hits) / static_cast<double>(params.paths);
  est.std_err =
      std::sqrt(est.p_hat * (1.0 - est.p_hat) / static_cast<double>(params.paths));
  if (oracle.empty) {
    est.escape_bias_bound = 0.0;
  } else {
    const double c = kernel.c();
    est.escape_bias_bound =
        std::min(1.0, c * c * kernel.g(params.r_esc) / kernel.g(oracle.reach));
  }
  if (tally.unresolved * 1000 > params.paths) {
    est.warnings.push_back("max_steps exceeded on more than 0.1% of paths (" +
                           std::to_string(tally.unresolved) + " of " +
                           std::to_string(params.paths) + "), counted as misses");
  }
  return est;
}

double resolve_truncation(const SimParams& params) {
  return params.truncation_radius > 0.0 ? params.truncation_radius : 10.0 * params.r_esc;
}

}  // namespace

int worker_thread_count() {
  const char* env = std::getenv("POTENTIA_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  const long v = std::strtol(env, nullptr, 10);
  if (v < 1) return 1;
  if (v > 1024) return 1024;
  return static_cast<int>(v);
}

double one_sided_stable(double beta, double theta_uniform, double exp_uniform) {
  const double t = kPi * theta_uniform;
  const double W = -std::log(exp_uniform);
  const double A = std::pow(std::sin(beta * t), beta / (1.0 - beta)) *
                   std::sin((1.0 - beta) * t) /
                   std::pow(std::sin(t), 1.0 / (1.0 - beta));
  return std::pow(A / W, (1.0 - beta) / beta);
}

HittingEstimate wos_hit_probability(const BallConfig& config, const Kernel& kernel,
                                    const Point& x, const SimParams& params) {
  if (kernel.alpha() != 2.0) {
    throw Error(ErrorCode::invalid_argument, "wos_hit_probability: requires alpha = 2");
  }
  if (kernel.d() < 3) {
    throw Error(ErrorCode::invalid_argument,
                "wos_hit_probability: requires d >= 3 (transience)");
  }
  const SceneOracle oracle = build_oracle(config, resolve_truncation(params));
  validate_common(config, kernel, x, params, oracle);

  if (oracle.empty) {
    return finalize(params, kernel, oracle, Tally{});  // nothing to hit
  }

  const int d = kernel.d();
  const double r_esc = params.r_esc;
  const std::uint64_t max_steps = params.max_steps;
  auto path_fn = [&](std::uint64_t idx) -> Outcome {
    PathRng rng(params.seed, idx);
    double cur[16];
    for (int i = 0; i < d; ++i) cur[i] = x[i];
    for (std::uint64_t step = 0; step < max_steps; ++step) {
      const SceneOracle::Near nr = oracle.near(cur);
      if (nr.surface <= 1e-9 * nr.radius) return Outcome::hit;
      if (oracle.dist_x0(cur) > r_esc) return Outcome::miss;
      const double rad = 0.45 * nr.surface;
      double u[16];
      double nrm = 0.0;
      for (int i = 0; i < d; ++i) {
        u[i] = rng.normal();
        nrm += u[i] * u[i];
      }
      nrm = std::sqrt(nrm);
      for (int i = 0; i < d; ++i) cur[i] += rad * u[i] / nrm;
    }
    return Outcome::unresolved;
  };
  return finalize(params, kernel, oracle, run_paths(params.paths, path_fn));
}

HittingEstimate stable_walk_hit_probability(const BallConfig& config, const Kernel& kernel,
                                            const Point& x, const SimParams& params) {
  if (!(kernel.alpha() < 2.0)) {
    throw Error(ErrorCode::invalid_argument,
                "stable_walk_hit_probability: requires alpha < 2");
  }
  const SceneOracle oracle = build_oracle(config, resolve_truncation(params));
  validate_common(config, kernel, x, params, oracle);

  if (oracle.empty) {
    return finalize(params, kernel, oracle, Tally{});
  }

  const int d = kernel.d();
  const double beta = kernel.alpha() / 2.0;
  const double scale =
      params.step_scale > 0.0 ? params.step_scale : 0.1 * oracle.rmin;
  const double r_esc = params.r_esc;
  const std::uint64_t max_steps = params.max_steps;
  auto path_fn = [&](std::uint64_t idx) -> Outcome {
    PathRng rng(params.seed, idx);
    double cur[16];
    for (int i = 0; i < d; ++i) cur[i] = x[i];
    for (std::uint64_t step = 0; step < max_steps; ++step) {
      if (oracle.inside(cur)) return Outcome::hit;
      if (oracle.dist_x0(cur) > r_esc) return Outcome::miss;
      const double S = one_sided_stable(beta, rng.uniform_pos(), rng.uniform_pos());
      const double mag = scale * std::sqrt(2.0 * S);
      for (int i = 0; i < d; ++i) cur[i] += mag * rng.normal();
    }
    return Outcome::unresolved;
  };
  HittingEstimate est = finalize(params, kernel, oracle, run_paths(params.paths, path_fn));
  est.warnings.push_back(
      "stable walk: hits require landing inside a ball (crossings between landings are "
      "missed); escape bias bound is the continuum-limit value");

  if (params.self_check) {
    SimParams half = params;
    half.step_scale = 0.5 * scale;
    half.paths = std::max<std::uint64_t>(1000, params.paths / 4);
    half.self_check = false;
    half.seed = params.seed + 0x9e3779b9ULL;
    const HittingEstimate second = stable_walk_hit_probability(config, kernel, x, half);
    est.self_check_delta = std::fabs(est.p_hat - second.p_hat);
    est.self_check_limit =
        3.0 * std::sqrt(est.std_err * est.std_err + second.std_err * second.std_err);
    if (est.self_check_delta > est.self_check_limit) {
      est.warnings.push_back("step-scale self-check failed: halving step_scale moved "
                             "p_hat by " +
                             std::to_string(est.self_check_delta) + " > " +
                             std::to_string(est.self_check_limit));
    }
  }
  return est;
}

HittingEstimate hit_probability(const BallConfig& config, const Kernel& kernel,
                                const Point& x, const SimParams& params) {
  if (kernel.alpha() == 2.0) return wos_hit_probability(config, kernel, x, params);
  return stable_walk_hit_probability(config, kernel, x, params);
}

std::vector<std::pair<double, HittingEstimate>> zero_one_probe(
    const BallConfig& config, const Kernel& kernel, const std::vector<double>& distances,
    const SimParams& params) {
  for (std::size_t i = 0; i + 1 < distances.size(); ++i) {
    if (!(distances[i] < distances[i + 1])) {
      throw Error(ErrorCode::invalid_argument, "zero_one_probe: distances must increase");
    }
  }
  std::vector<std::pair<double, HittingEstimate>> table;
  table.reserve(distances.size());
  for (double L : distances) {
    Point x = config.x0();
    if (x.empty()) {
      throw Error(ErrorCode::invalid_argument, "zero_one_probe: empty base point");
    }
    x[0] += L;
    table.emplace_back(L, hit_probability(config, kernel, x, params));
  }
  return table;
}

}  // namespace potentia
