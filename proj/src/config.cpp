#include "potentia/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <unordered_map>

#include "potentia/errors.hpp"
#include "potentia/rng.hpp"

namespace potentia {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Uniform hash grid over ball centers for neighbor queries on large explicit
/// configurations (small ones use plain pair scans).
class PointGrid {
public:
  PointGrid(const std::vector<Ball>& balls, double cell) : balls_(balls), cell_(cell) {
    for (std::uint32_t i = 0; i < balls.size(); ++i) {
      cells_[key_of(balls[i].center)].push_back(i);
    }
  }

  template <class F>
  void for_each_near(const Point& p, double radius, F&& fn) const {
    const int d = static_cast<int>(p.size());
    std::vector<std::int64_t> lo(d), hi(d), cur(d);
    for (int a = 0; a < d; ++a) {
      lo[a] = static_cast<std::int64_t>(std::floor((p[a] - radius) / cell_));
      hi[a] = static_cast<std::int64_t>(std::floor((p[a] + radius) / cell_));
      cur[a] = lo[a];
    }
    while (true) {
      auto it = cells_.find(mix_key(cur));
      if (it != cells_.end()) {
        for (std::uint32_t idx : it->second) fn(idx);
      }
      int a = d - 1;
      while (a >= 0 && ++cur[a] > hi[a]) {
        cur[a] = lo[a];
        --a;
      }
      if (a < 0) break;
    }
  }

private:
  std::uint64_t key_of(const Point& p) const {
    std::vector<std::int64_t> c(p.size());
    for (std::size_t a = 0; a < p.size(); ++a) {
      c[a] = static_cast<std::int64_t>(std::floor(p[a] / cell_));
    }
    return mix_key(c);
  }

  static std::uint64_t mix_key(const std::vector<std::int64_t>& c) {
    std::uint64_t h = 0x51ed27f1c9e3a517ULL;
    for (std::int64_t v : c) {
      h = PathRng::mix(h ^ static_cast<std::uint64_t>(v));
    }
    return h;
  }

  const std::vector<Ball>& balls_;
  double cell_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
};

constexpr std::size_t kPairScanLimit = 5000;

double max_radius(const std::vector<Ball>& balls) {
  double m = 0.0;
  for (const auto& b : balls) m = std::max(m, b.radius);
  return m;
}

/// Nearest-neighbor center distance of ball i (exact; grid-accelerated).
double nn_distance(const std::vector<Ball>& balls, const PointGrid* grid, std::size_t i) {
  double best = kInf;
  if (grid == nullptr) {
    for (std::size_t j = 0; j < balls.size(); ++j) {
      if (j == i) continue;
      best = std::min(best, distance(balls[i].center, balls[j].center));
    }
    return best;
  }
  double radius = 1.0;
  // grow the search window until something is found, then confirm exactly
  for (int round = 0; round < 128 && !std::isfinite(best); ++round) {
    grid->for_each_near(balls[i].center, radius, [&](std::uint32_t j) {
      if (j == i) return;
      best = std::min(best, distance(balls[i].center, balls[j].center));
    });
    radius *= 2.0;
  }
  if (std::isfinite(best)) {
    grid->for_each_near(balls[i].center, best, [&](std::uint32_t j) {
      if (j == i) return;
      best = std::min(best, distance(balls[i].center, balls[j].center));
    });
  }
  return best;
}

}  // namespace

double RadiusLaw::operator()(double rho) const {
  if (!(rho > 0.0)) throw Error(ErrorCode::invalid_argument, "RadiusLaw: rho must be > 0");
  if (beta == 0.0) return c;
  if (beta == 1.0) return c / rho;
  if (beta == 2.0) return c / (rho * rho);
  if (beta == 3.0) return c / (rho * rho * rho);
  return c * std::pow(rho, -beta);
}

double unit_ball_volume(int d) {
  if (d < 1) throw Error(ErrorCode::invalid_argument, "unit_ball_volume: d >= 1 required");
  const double hd = 0.5 * static_cast<double>(d);
  return std::pow(3.14159265358979323846, hd) / std::tgamma(hd + 1.0);
}

// ---- BallConfig --------------------------------------------------------------

BallConfig BallConfig::explicit_config(Point x0, std::vector<Ball> balls) {
  BallConfig cfg;
  cfg.x0_ = std::move(x0);
  cfg.balls_ = std::move(balls);
  cfg.validate_explicit();
  return cfg;
}

BallConfig BallConfig::lattice_config(Point x0, GeneratorSpec spec) {
  BallConfig cfg;
  cfg.x0_ = std::move(x0);
  cfg.generator_ = std::move(spec);
  cfg.validate_generator();
  return cfg;
}

void BallConfig::validate_explicit() const {
  const int d = dimension();
  if (d < 1) throw Error(ErrorCode::scene_dimension, "config: x0 must have dimension >= 1");
  for (std::size_t i = 0; i < balls_.size(); ++i) {
    const Ball& b = balls_[i];
    if (static_cast<int>(b.center.size()) != d) {
      throw Error(ErrorCode::scene_dimension,
                  "config: ball " + std::to_string(i) + " dimension mismatch");
    }
    if (!(b.radius > 0.0) || !std::isfinite(b.radius)) {
      throw Error(ErrorCode::invalid_configuration,
                  "config: ball " + std::to_string(i) + " has degenerate radius");
    }
  }
  // pairwise disjointness of the closed balls
  auto check_pair = [&](std::size_t i, std::size_t j) {
    const double dist = distance(balls_[i].center, balls_[j].center);
    if (dist <= balls_[i].radius + balls_[j].radius) {
      throw Error(ErrorCode::scene_overlap, "config: balls " + std::to_string(i) + " and " +
                                                std::to_string(j) + " overlap");
    }
  };
  if (balls_.size() <= kPairScanLimit) {
    for (std::size_t i = 0; i < balls_.size(); ++i) {
      for (std::size_t j = i + 1; j < balls_.size(); ++j) check_pair(i, j);
    }
  } else {
    const double rmax = max_radius(balls_);
    PointGrid grid(balls_, std::max(2.0 * rmax, 1e-12));
    for (std::size_t i = 0; i < balls_.size(); ++i) {
      grid.for_each_near(balls_[i].center, balls_[i].radius + rmax, [&](std::uint32_t j) {
        if (j > i) check_pair(i, j);
      });
    }
  }
}

void BallConfig::validate_generator() const {
  const GeneratorSpec& g = *generator_;
  if (dimension() < 1) {
    throw Error(ErrorCode::scene_dimension, "config: x0 must have dimension >= 1");
  }
  if (!(g.spacing > 0.0) || !std::isfinite(g.spacing)) {
    throw Error(ErrorCode::invalid_configuration, "generator: spacing must be > 0");
  }
  if (!(g.phi.c > 0.0) || !std::isfinite(g.phi.c)) {
    throw Error(ErrorCode::invalid_configuration, "generator: phi.c must be > 0");
  }
  if (g.phi.beta < 0.0) {
    throw Error(ErrorCode::invalid_configuration, "generator: phi.beta must be >= 0");
  }
  if (g.n_max < 0 || g.n_max > 24) {
    throw Error(ErrorCode::invalid_configuration, "generator: n_max must lie in [0, 24]");
  }
  // The largest radius sits on the innermost sites and the nearest pair is one
  // lattice step apart, so 2*phi(spacing) < spacing certifies disjointness.
  const double rmax = g.phi(g.spacing);
  if (2.0 * rmax >= g.spacing) {
    throw Error(ErrorCode::scene_overlap,
                "generator: balls overlap (2*phi(spacing) >= spacing)");
  }
}

const std::vector<Ball>& BallConfig::explicit_balls() const {
  if (generator_) {
    throw Error(ErrorCode::invalid_configuration, "config: generator-backed, not explicit");
  }
  return balls_;
}

std::uint64_t BallConfig::for_each_in_shell(double inner, double outer,
                                            const std::function<void(const Ball&)>& fn) const {
  if (!(inner >= 0.0) || !(outer > inner)) {
    throw Error(ErrorCode::invalid_argument, "for_each_in_shell: need 0 <= inner < outer");
  }
  std::uint64_t count = 0;
  if (!generator_) {
    for (const Ball& b : balls_) {
      const double rho = distance(b.center, x0_);
      if (rho >= inner && rho < outer) {
        fn(b);
        ++count;
      }
    }
    return count;
  }

  const GeneratorSpec& g = *generator_;
  const int d = dimension();
  const std::int64_t kcap = static_cast<std::int64_t>(1) << g.n_max;
  const std::int64_t trunc_sq = kcap * kcap;
  const double outer_k = outer / g.spacing;
  const double outer_k_sq = outer_k * outer_k;

  std::vector<std::int64_t> k(d, 0);
  Ball ball;
  ball.center.assign(d, 0.0);

  // depth-first lexicographic walk with square-norm pruning; the innermost
  // dimension runs over the admissible |k_d| band directly
  auto emit = [&](std::int64_t ksq) {
    const double rho = g.spacing * std::sqrt(static_cast<double>(ksq));
    if (rho < inner || rho >= outer) return;
    for (int a = 0; a < d; ++a) {
      ball.center[a] = x0_[a] + g.spacing * static_cast<double>(k[a]);
    }
    ball.radius = g.phi(rho);
    fn(ball);
    ++count;
  };

  auto recurse = [&](auto&& self, int depth, std::int64_t partial_sq) -> void {
    const double room = std::min(static_cast<double>(trunc_sq),
                                 outer_k_sq) - static_cast<double>(partial_sq);
    if (room < 0.0) return;
    std::int64_t bound = static_cast<std::int64_t>(std::floor(std::sqrt(room)));
    while (static_cast<double>(partial_sq + bound * bound) >
           std::min(static_cast<double>(trunc_sq), outer_k_sq)) {
      --bound;  // guard against sqrt rounding
    }
    if (depth == d - 1) {
      for (std::int64_t v = -bound; v <= bound; ++v) {
        const std::int64_t ksq = partial_sq + v * v;
        if (ksq == 0) continue;            // the x0 site is excluded
        if (ksq >= trunc_sq) continue;     // open truncation ball, integer-exact
        k[depth] = v;
        emit(ksq);
      }
    } else {
      for (std::int64_t v = -bound; v <= bound; ++v) {
        k[depth] = v;
        self(self, depth + 1, partial_sq + v * v);
      }
    }
  };
  recurse(recurse, 0, 0);
  return count;
}

std::uint64_t BallConfig::for_each(const std::function<void(const Ball&)>& fn) const {
  return for_each_in_shell(0.0, reach() + 1.0, fn);
}

std::uint64_t BallConfig::ball_count() const {
  if (!generator_) return balls_.size();
  return for_each([](const Ball&) {});
}

double BallConfig::reach() const {
  if (!generator_) {
    double m = 0.0;
    for (const Ball& b : balls_) m = std::max(m, distance(b.center, x0_) + b.radius);
    return m;
  }
  const GeneratorSpec& g = *generator_;
  const double rho_max = g.spacing * static_cast<double>(static_cast<std::int64_t>(1) << g.n_max);
  return rho_max + g.phi(rho_max);
}

double BallConfig::min_center_distance() const {
  if (!generator_) {
    double m = kInf;
    for (const Ball& b : balls_) m = std::min(m, distance(b.center, x0_));
    return m;
  }
  // the truncation ball is open, so n_max = 0 keeps no site at all
  return generator_->n_max >= 1 ? generator_->spacing : kInf;
}

double BallConfig::nearest_center_spacing() const {
  if (generator_) {
    const GeneratorSpec& g = *generator_;
    return g.n_max >= 1 ? g.spacing : kInf;
  }
  if (balls_.size() < 2) return kInf;
  double best = kInf;
  if (balls_.size() <= kPairScanLimit) {
    for (std::size_t i = 0; i < balls_.size(); ++i) {
      for (std::size_t j = i + 1; j < balls_.size(); ++j) {
        best = std::min(best, distance(balls_[i].center, balls_[j].center));
      }
    }
  } else {
    const double rmax = max_radius(balls_);
    PointGrid grid(balls_, std::max(2.0 * rmax, 1e-12));
    for (std::size_t i = 0; i < balls_.size(); ++i) {
      best = std::min(best, nn_distance(balls_, &grid, i));
    }
  }
  return best;
}

double BallConfig::disjointness_factor() const {
  if (generator_) {
    const GeneratorSpec& g = *generator_;
    // nearest pairs sit on the innermost shell where radii are largest
    const double rmax = g.phi(g.spacing);
    return nearest_center_spacing() / (2.0 * rmax);
  }
  if (balls_.size() < 2) return kInf;
  double best = kInf;
  for (std::size_t i = 0; i < balls_.size(); ++i) {
    for (std::size_t j = i + 1; j < balls_.size(); ++j) {
      const double dist = distance(balls_[i].center, balls_[j].center);
      best = std::min(best, dist / (balls_[i].radius + balls_[j].radius));
    }
  }
  return best;
}

std::vector<Ball> BallConfig::materialize(std::uint64_t max_balls) const {
  if (!generator_) {
    if (balls_.size() > max_balls) {
      throw Error(ErrorCode::invalid_configuration, "config: materialization cap exceeded");
    }
    return balls_;
  }
  const std::uint64_t n = ball_count();
  if (n > max_balls) {
    throw Error(ErrorCode::invalid_configuration,
                "config: generator materializes " + std::to_string(n) +
                    " balls, cap is " + std::to_string(max_balls));
  }
  std::vector<Ball> out;
  out.reserve(n);
  for_each([&](const Ball& b) { out.push_back(b); });
  return out;
}

// ---- separation --------------------------------------------------------------

namespace {

double separation_term(const Kernel& kernel, int d, double nn, double rho, double radius) {
  // (rho(z,z')/4)^d / (4 rho(x0,z))^d * g(r_z) / g(rho(x0,z))
  return std::pow(nn / (16.0 * rho), d) * kernel.g(radius) / kernel.g(rho);
}

}  // namespace

double separation_infimum(const BallConfig& config, const Kernel& kernel) {
  if (config.dimension() != kernel.d()) {
    throw Error(ErrorCode::scene_dimension, "separation_infimum: dimension mismatch");
  }
  if (config.ball_count() < 2) return kInf;  // vacuous infimum
  const int d = kernel.d();
  if (config.has_generator()) {
    const GeneratorSpec& g = *config.generator();
    const double nn = config.nearest_center_spacing();
    const double rho_min = g.spacing;
    const double rho_max = g.spacing * static_cast<double>(static_cast<std::int64_t>(1) << g.n_max);
    // the per-z term is C * rho^(beta(d-alpha) - alpha): monotone in rho, so
    // the infimum sits at one of the extreme shells (both are populated)
    const double t_lo = separation_term(kernel, d, nn, rho_min, g.phi(rho_min));
    const double t_hi = separation_term(kernel, d, nn, rho_max, g.phi(rho_max));
    return std::min(t_lo, t_hi);
  }

  const std::vector<Ball>& balls = config.explicit_balls();
  std::unique_ptr<PointGrid> grid;
  if (balls.size() > kPairScanLimit) {
    grid = std::make_unique<PointGrid>(balls, std::max(2.0 * max_radius(balls), 1e-12));
  }
  double inf = kInf;
  for (std::size_t i = 0; i < balls.size(); ++i) {
    const double rho = distance(balls[i].center, config.x0());
    if (!(rho > 0.0)) {
      throw Error(ErrorCode::invalid_configuration,
                  "separation_infimum: ball centered at x0");
    }
    const double nn = nn_distance(balls, grid.get(), i);
    inf = std::min(inf, separation_term(kernel, d, nn, rho, balls[i].radius));
  }
  return inf;
}

// ---- regularity --------------------------------------------------------------

RegularityReport regularity_check(const BallConfig& config, double C,
                                  const std::optional<RadiusLaw>& user_phi,
                                  std::uint64_t covering_probes, std::uint64_t seed) {
  if (!(C > 1.0)) {
    throw Error(ErrorCode::invalid_argument, "regularity_check: C must be > 1");
  }
  RadiusLaw phi;
  if (config.has_generator()) {
    phi = user_phi.value_or(RadiusLaw{config.generator()->phi.c / std::sqrt(C),
                                      config.generator()->phi.beta});
  } else {
    if (!user_phi) {
      throw Error(ErrorCode::invalid_configuration,
                  "regularity_check: explicit config needs an envelope");
    }
    phi = *user_phi;
  }

  RegularityReport report;
  report.min_center_gap = config.nearest_center_spacing();

  // envelope: phi(rho) < r_z < C phi(rho), strictly
  bool envelope_ok = true;
  if (config.has_generator() && !user_phi) {
    envelope_ok = true;  // r = sqrt(C) * phi by construction, strictly inside
  } else {
    std::uint64_t index = 0;
    config.for_each([&](const Ball& b) {
      if (!envelope_ok) return;
      const double rho = distance(b.center, config.x0());
      const double lo = phi(rho);
      if (!(b.radius > lo) || !(b.radius < C * lo)) {
        envelope_ok = false;
        report.failure = "ball " + std::to_string(index) + " violates the radius envelope";
      }
      ++index;
    });
  }

  // covering: sampled balls of radius R inside the configuration's region
  // must contain a center
  double R;
  double probe_extent;
  std::vector<Ball> materialized;
  if (config.has_generator()) {
    R = config.generator()->spacing;  // covers the excluded x0 site's hole
    probe_extent = 0.8 * config.generator()->spacing *
                   static_cast<double>(static_cast<std::int64_t>(1) << config.generator()->n_max);
  } else {
    materialized = config.explicit_balls();
    double max_rho = 0.0;
    for (const Ball& b : materialized) {
      max_rho = std::max(max_rho, distance(b.center, config.x0()));
    }
    probe_extent = max_rho;
    R = 0.0;  // determined below as the observed covering radius
  }

  const int d = config.dimension();
  PathRng rng(seed, 0);
  std::vector<double> dists;
  dists.reserve(covering_probes);
  for (std::uint64_t p = 0; p < covering_probes; ++p) {
    // uniform point in B(x0, probe_extent)
    Point y(d);
    double nrm = 0.0;
    for (int a = 0; a < d; ++a) {
      y[a] = rng.normal();
      nrm += y[a] * y[a];
    }
    nrm = std::sqrt(nrm);
    const double radial = probe_extent * std::pow(rng.uniform_pos(), 1.0 / d);
    for (int a = 0; a < d; ++a) y[a] = config.x0()[a] + y[a] / nrm * radial;

    double dist = kInf;
    if (config.has_generator()) {
      const GeneratorSpec& g = *config.generator();
      // nearest lattice site: check the 3^d cell neighborhood of the rounding
      std::vector<std::int64_t> base(d);
      for (int a = 0; a < d; ++a) {
        base[a] = static_cast<std::int64_t>(std::llround((y[a] - config.x0()[a]) / g.spacing));
      }
      const std::int64_t kcap = static_cast<std::int64_t>(1) << g.n_max;
      std::vector<std::int64_t> off(d, -1);
      while (true) {
        std::int64_t ksq = 0;
        double dd = 0.0;
        for (int a = 0; a < d; ++a) {
          const std::int64_t kv = base[a] + off[a];
          ksq += kv * kv;
          const double delta = y[a] - (config.x0()[a] + g.spacing * static_cast<double>(kv));
          dd += delta * delta;
        }
        if (ksq != 0 && ksq < kcap * kcap) dist = std::min(dist, std::sqrt(dd));
        int a = d - 1;
        while (a >= 0 && ++off[a] > 1) {
          off[a] = -1;
          --a;
        }
        if (a < 0) break;
      }
    } else {
      for (const Ball& b : materialized) dist = std::min(dist, distance(y, b.center));
    }
    dists.push_back(dist);
  }
  report.probes_tried = covering_probes;
  if (!config.has_generator()) {
    for (double v : dists) R = std::max(R, v);
  }
  report.covering_radius = R;
  for (double v : dists) {
    if (v > R * (1.0 + 1e-9)) ++report.probes_failed;
  }

  const bool covering_ok = report.probes_failed == 0;
  const bool separated = report.min_center_gap > 0.0;
  report.regular = envelope_ok && covering_ok && separated;
  if (!envelope_ok && report.failure.empty()) {
    report.failure = "radius envelope violated";
  }
  if (!covering_ok && report.failure.empty()) {
    report.failure = "covering probe found an uncovered ball";
  }
  return report;
}

// ---- series and classifiers --------------------------------------------------

CriterionSeries criterion_series(const BallConfig& config, const Kernel& kernel,
                                 int n_min, int n_max) {
  if (config.dimension() != kernel.d()) {
    throw Error(ErrorCode::scene_dimension, "criterion_series: dimension mismatch");
  }
  CriterionSeries series;
  if (config.ball_count() == 0) return series;

  if (n_max < 0) {
    const double lo = config.min_center_distance();
    const double hi = config.has_generator()
                          ? config.generator()->spacing *
                                static_cast<double>(static_cast<std::int64_t>(1)
                                                    << config.generator()->n_max)
                          : [&] {
                              double m = 0.0;
                              config.for_each([&](const Ball& b) {
                                m = std::max(m, distance(b.center, config.x0()));
                              });
                              return m;
                            }();
    n_min = std::min(n_min, static_cast<int>(std::floor(std::log2(lo))));
    n_max = static_cast<int>(std::floor(std::log2(hi)));
  }

  double partial = 0.0;
  for (int n = n_min; n <= n_max; ++n) {
    CriterionShell shell;
    shell.n = n;
    const double inner = std::exp2(static_cast<double>(n));
    const double outer = std::exp2(static_cast<double>(n + 1));
    shell.ball_count = config.for_each_in_shell(inner, outer, [&](const Ball& b) {
      shell.term += kernel.g(distance(b.center, config.x0())) / kernel.g(b.radius);
    });
    partial += shell.term;
    shell.partial_sum = partial;
    series.shells.push_back(shell);
  }
  series.total = partial;
  return series;
}

double powerlaw_exponent(int d, double alpha, double beta) {
  return static_cast<double>(d) - (1.0 + beta) * (static_cast<double>(d) - alpha);
}

Verdict powerlaw_classifier(int d, double alpha, double beta) {
  Kernel probe(d, alpha);  // validates (d, alpha)
  if (beta < 0.0) {
    throw Error(ErrorCode::invalid_argument, "powerlaw_classifier: beta must be >= 0");
  }
  const double e = powerlaw_exponent(d, alpha, beta);
  Verdict v;
  v.closed_form = true;
  if ((1.0 + beta) * (static_cast<double>(d) - alpha) <= static_cast<double>(d)) {
    v.kind = VerdictKind::Unavoidable;
    v.rationale = "closed form: (1+beta)(d-alpha) <= d; shell terms scale like 2^(" +
                  std::to_string(e) + " n), series diverges";
  } else {
    v.kind = VerdictKind::Avoidable;
    v.rationale = "closed form: (1+beta)(d-alpha) > d; shell terms scale like 2^(" +
                  std::to_string(e) + " n), series converges";
  }
  return v;
}

MvReport mv_condition(const BallConfig& config, const Kernel& kernel,
                      const std::vector<double>& r_samples) {
  if (!config.has_generator()) {
    throw Error(ErrorCode::invalid_configuration, "mv_condition: needs a generator envelope");
  }
  if (config.dimension() != kernel.d()) {
    throw Error(ErrorCode::scene_dimension, "mv_condition: dimension mismatch");
  }
  const RadiusLaw& phi = config.generator()->phi;
  MvReport report;
  report.exponent = static_cast<double>(kernel.d()) +
                    (kernel.alpha() - static_cast<double>(kernel.d())) * (1.0 + phi.beta);
  report.holds = report.exponent >= 0.0;
  const double vd = unit_ball_volume(kernel.d());
  for (double r : r_samples) {
    if (!(r > 0.0)) {
      throw Error(ErrorCode::invalid_argument, "mv_condition: sample radii must be > 0");
    }
    MvSample s;
    s.r = r;
    s.h = vd * std::pow(r, kernel.d()) * kernel.g(r) / kernel.g(phi(r));
    report.samples.push_back(s);
  }
  return report;
}

const char* to_string(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::Unavoidable: return "Unavoidable";
    case VerdictKind::Avoidable: return "Avoidable";
    case VerdictKind::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

}  // namespace potentia
