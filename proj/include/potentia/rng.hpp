#pragma once

#include <cmath>
#include <cstdint>

namespace potentia {

/// Counter-based random stream (SplitMix64).  Each draw is a pure function of
/// (key, counter), so per-path streams keyed by (seed, path index) give results
/// that cannot depend on thread scheduling or path execution order.
class PathRng {
public:
  PathRng(std::uint64_t seed, std::uint64_t path_index)
      : state_(mix(seed ^ 0x8f1bbcdcbfa53e0bULL) ^ mix(path_index + 0x2545f4914f6cdd1dULL)) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1]; safe as a log() argument.
  double uniform_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; draws are consumed in pairs.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u = uniform_pos();
    const double v = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u));
    const double ang = 6.283185307179586476925286766559 * v;
    spare_ = rad * std::sin(ang);
    have_spare_ = true;
    return rad * std::cos(ang);
  }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace potentia
