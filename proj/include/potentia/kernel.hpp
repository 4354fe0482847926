#pragma once

#include <cstddef>
#include <vector>

namespace potentia {

using Point = std::vector<double>;

double distance(const Point& a, const Point& b);
double norm(const Point& p);

/// Radial Riesz-type kernel g(r) = amplitude * r^(alpha - d) on R^d, with
/// 0 < alpha <= 2 and alpha < d.  The spatial kernel is G(x, y) = g(|x - y|).
/// g is strictly decreasing, g(0+) = +inf, and satisfies the exact doubling
/// identity g(r/2) = 2^(d-alpha) * g(r).
class Kernel {
public:
  Kernel(int d, double alpha, double amplitude = 1.0);

  int d() const { return d_; }
  double alpha() const { return alpha_; }
  double amplitude() const { return amplitude_; }

  /// Radial profile; +inf at r = 0, rejects r < 0.
  double g(double r) const;

  /// Inverse of the radial profile: radius r with g(r) = v (v > 0).
  double g_inverse(double v) const;

  /// G(x, y) = g(|x - y|); +inf on the diagonal.
  double green(const Point& x, const Point& y) const;

  /// Continuity constant of the quasi-metric comparison (1 for exact Riesz).
  double c() const { return 1.0; }

  /// Doubling constant c_D with g(r/2) <= c_D g(r); exact value 2^(d-alpha).
  double doubling_constant() const { return doubling_; }

  /// Small-radius cutoff below which doubling is only required to hold; the
  /// exact power law needs none.
  double r0() const { return 0.0; }

  /// c0 = d/alpha: the normalized-Lebesgue ball potential satisfies
  /// G lambda_{B(x,r)} <= c0 * g(r), with equality at the center.
  double c0() const { return static_cast<double>(d_) / alpha_; }

private:
  int d_;
  double alpha_;
  double amplitude_;
  double doubling_;
};

/// A finite point sample with its Gram matrix of kernel values
/// gram[i*n + j] = G(points[i], points[j]).
struct QuasimetricSample {
  std::vector<Point> points;
  std::vector<double> gram;  // row-major n x n, +inf on the diagonal

  std::size_t size() const { return points.size(); }
  double at(std::size_t i, std::size_t j) const { return gram[i * size() + j]; }
};

QuasimetricSample make_sample(const Kernel& kernel, const std::vector<Point>& points);

/// Smallest C with min{G(x,z), G(y,z)} <= C * G(x,y) over all ordered triples
/// of distinct sample points.  For the exact Riesz kernel C <= 2^(d-alpha).
double triangle_property_constant(const QuasimetricSample& sample);

struct MetrizeResult {
  std::vector<double> metric;   // row-major n x n shortest-path metric
  std::vector<double> quasi;    // row-major n x n snowflaked quasi-distance q
  double distortion = 1.0;      // max over pairs of q / metric  (>= 1)
  double gamma = 1.0;

  std::size_t size = 0;
  double at(std::size_t i, std::size_t j) const { return metric[i * size + j]; }
};

/// Metrization of the kernel quasi-metric: form the snowflaked symmetric
/// quasi-distance q(x,y) = (G(x,y)^-1 + G(y,x)^-1)^(1/gamma) on the sample and
/// close it under chaining (all-pairs shortest path, iterated to a floating
/// point fixpoint so the triangle inequality holds exactly as evaluated).
/// For the exact Riesz kernel with gamma = d - alpha, q is already a metric
/// (a multiple of the Euclidean one) and the distortion is 1.
MetrizeResult frink_metrize(const QuasimetricSample& sample, double gamma);

}  // namespace potentia
