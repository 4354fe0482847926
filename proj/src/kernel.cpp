#include "potentia/kernel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace potentia {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double distance(const Point& a, const Point& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("distance: dimension mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return std::sqrt(s);
}

double norm(const Point& p) {
  double s = 0.0;
  for (double v : p) s += v * v;
  return std::sqrt(s);
}

Kernel::Kernel(int d, double alpha, double amplitude)
    : d_(d), alpha_(alpha), amplitude_(amplitude) {
  if (d < 1) throw std::invalid_argument("Kernel: dimension must be >= 1");
  if (!(alpha > 0.0) || !(alpha <= 2.0)) {
    throw std::invalid_argument("Kernel: alpha must lie in (0, 2]");
  }
  if (!(alpha < static_cast<double>(d))) {
    throw std::invalid_argument("Kernel: alpha must be < d");
  }
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
    throw std::invalid_argument("Kernel: amplitude must be finite and > 0");
  }
  doubling_ = std::pow(2.0, static_cast<double>(d_) - alpha_);
}

double Kernel::g(double r) const {
  if (r < 0.0 || std::isnan(r)) {
    throw std::invalid_argument("Kernel::g: radius must be >= 0");
  }
  if (r == 0.0) return kInf;
  return amplitude_ * std::pow(r, alpha_ - static_cast<double>(d_));
}

double Kernel::g_inverse(double v) const {
  if (!(v > 0.0)) throw std::invalid_argument("Kernel::g_inverse: value must be > 0");
  return std::pow(v / amplitude_, 1.0 / (alpha_ - static_cast<double>(d_)));
}

double Kernel::green(const Point& x, const Point& y) const {
  if (static_cast<int>(x.size()) != d_ || static_cast<int>(y.size()) != d_) {
    throw std::invalid_argument("Kernel::green: point dimension mismatch");
  }
  return g(distance(x, y));
}

QuasimetricSample make_sample(const Kernel& kernel, const std::vector<Point>& points) {
  const std::size_t n = points.size();
  QuasimetricSample s;
  s.points = points;
  s.gram.assign(n * n, kInf);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = kernel.green(points[i], points[j]);
      s.gram[i * n + j] = v;
      s.gram[j * n + i] = v;
    }
  }
  return s;
}

double triangle_property_constant(const QuasimetricSample& sample) {
  const std::size_t n = sample.size();
  if (n < 3) throw std::invalid_argument("triangle_property_constant: need >= 3 points");
  double best = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      if (y == x) continue;
      const double gxy = sample.at(x, y);
      if (!(gxy > 0.0) || !std::isfinite(gxy)) {
        throw std::invalid_argument("triangle_property_constant: coincident points");
      }
      for (std::size_t z = 0; z < n; ++z) {
        if (z == x || z == y) continue;
        const double m = std::min(sample.at(x, z), sample.at(y, z));
        const double ratio = m / gxy;
        if (ratio > best) best = ratio;
      }
    }
  }
  return best;
}

MetrizeResult frink_metrize(const QuasimetricSample& sample, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("frink_metrize: gamma must be > 0");
  const std::size_t n = sample.size();
  if (n < 2) throw std::invalid_argument("frink_metrize: need >= 2 points");

  MetrizeResult out;
  out.gamma = gamma;
  out.size = n;
  out.quasi.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double gij = sample.at(i, j);
      const double gji = sample.at(j, i);
      if (!(gij > 0.0) || !(gji > 0.0) || !std::isfinite(gij) || !std::isfinite(gji)) {
        throw std::invalid_argument("frink_metrize: coincident points in sample");
      }
      out.quasi[i * n + j] = std::pow(1.0 / gij + 1.0 / gji, 1.0 / gamma);
    }
  }

  // Chain closure: Floyd-Warshall sweeps repeated until nothing changes, so
  // that d(i,k) <= d(i,j) + d(j,k) holds for the stored values exactly as the
  // sums evaluate in floating point.
  out.metric = out.quasi;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        const double dik = out.metric[i * n + k];
        for (std::size_t j = 0; j < n; ++j) {
          const double via = dik + out.metric[k * n + j];
          if (via < out.metric[i * n + j]) {
            out.metric[i * n + j] = via;
            changed = true;
          }
        }
      }
    }
  }

  double distortion = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double m = out.metric[i * n + j];
      if (!(m > 0.0)) throw std::runtime_error("frink_metrize: degenerate chain metric");
      const double r = out.quasi[i * n + j] / m;
      if (r > distortion) distortion = r;
    }
  }
  out.distortion = distortion;
  return out;
}

}  // namespace potentia
