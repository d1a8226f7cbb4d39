#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace suzz {

using Vec = std::vector<double>;
/// Velocity direction, every entry is +1 or -1.
using Velocity = std::vector<int>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Error hierarchy. Everything thrown by the library derives from suzz::error.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A flow was queried at or beyond its explosion time (the graveyard state).
struct explosion_error : error {
  using error::error;
};

/// The integrated rate stopped growing before the exponential clock rang.
struct no_event_escape : error {
  using error::error;
};

struct guard_violation : error {
  using error::error;
};

struct thinning_bound_violation : error {
  using error::error;
};

struct gradient_mismatch : error {
  using error::error;
};

struct divergence_error : error {
  using error::error;
};

struct quadrature_error : error {
  using error::error;
};

struct config_error : error {
  using error::error;
};

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of chain k under master seed m: splitmix64(m xor k).
inline std::uint64_t chain_seed(std::uint64_t master, std::uint64_t k) {
  return splitmix64(master ^ k);
}

/// Deterministic random stream. The engine is fully specified by the
/// standard, and the conversions below avoid the implementation-defined
/// std:: distributions so streams are identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_pos() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  double exponential() { return -std::log(uniform_pos()); }

  double normal() {
    // Box-Muller, one value per call.
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    return r * std::cos(2.0 * M_PI * uniform());
  }

  int sign() { return (engine_() >> 63) ? 1 : -1; }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

inline double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

inline double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

inline double positive_part(double a) { return a > 0.0 ? a : 0.0; }

inline int sgn(double x) { return (x > 0.0) - (x < 0.0); }

/// x + theta * u, componentwise.
inline Vec along(std::span<const double> x, const Velocity& theta, double u) {
  Vec y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + theta[i] * u;
  return y;
}

}  // namespace suzz
