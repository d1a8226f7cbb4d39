#pragma once

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>

#include "suzz/core.hpp"

namespace suzz {

/// A target distribution pi(x) proportional to exp(-U(x)) on R^d.
///
/// Additive constants in U are dropped: every built-in has U(mode) = 0.
/// Targets are immutable evaluators; the callbacks must be re-entrant.
struct Target {
  std::string id;
  std::size_t dim = 1;
  std::function<double(std::span<const double>)> potential;
  std::function<void(std::span<const double>, std::span<double>)> gradient;
  /// Only for dim == 1 and known closed forms. Empty otherwise.
  std::function<double(double)> cdf_1d;
  std::function<double(double)> quantile_1d;
  std::optional<double> log_norm_const;
  /// Open box the target lives on; empty means all of R^d.
  Vec domain_lower;
  Vec domain_upper;

  double U(std::span<const double> x) const { return potential(x); }

  Vec grad(std::span<const double> x) const {
    Vec g(dim);
    gradient(x, g);
    return g;
  }

  double U1(double x) const { return potential(std::span<const double>(&x, 1)); }

  double dU1(double x) const {
    double g = 0.0;
    gradient(std::span<const double>(&x, 1), std::span<double>(&g, 1));
    return g;
  }

  bool has_cdf() const { return static_cast<bool>(cdf_1d); }
  bool bounded_domain() const { return !domain_lower.empty(); }
};

/// Central-difference gradient check at one point. Returns the worst scaled
/// error |fd - g_i| / (1 + |g_i|) over coordinates.
template <class Potential, class Gradient>
double gradient_error(const Potential& potential, const Gradient& gradient,
                      std::span<const double> x, double h = 1e-5) {
  const std::size_t d = x.size();
  Vec g(d);
  gradient(x, std::span<double>(g));
  Vec xp(x.begin(), x.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double xi = xp[i];
    xp[i] = xi + h;
    const double up = potential(std::span<const double>(xp));
    xp[i] = xi - h;
    const double dn = potential(std::span<const double>(xp));
    xp[i] = xi;
    const double fd = (up - dn) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - g[i]) / (1.0 + std::abs(g[i])));
  }
  return worst;
}

inline double gradient_error(const Target& t, std::span<const double> x,
                             double h = 1e-5) {
  return gradient_error(t.potential, t.gradient, x, h);
}

inline std::string format_point(std::span<const double> x) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ')';
  return os.str();
}

inline Target make_std_normal_1d() {
  Target t;
  t.id = "normal1d";
  t.dim = 1;
  t.potential = [](std::span<const double> x) { return 0.5 * x[0] * x[0]; };
  t.gradient = [](std::span<const double> x, std::span<double> g) { g[0] = x[0]; };
  t.cdf_1d = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  t.quantile_1d = [](double p) {
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
  };
  t.log_norm_const = 0.5 * std::log(2.0 * M_PI);
  return t;
}

/// Exp(1) reflected to the negative reals. dU(0) := 0.
inline Target make_symmetric_exponential_1d() {
  Target t;
  t.id = "exp1d";
  t.dim = 1;
  t.potential = [](std::span<const double> x) { return std::abs(x[0]); };
  t.gradient = [](std::span<const double> x, std::span<double> g) {
    g[0] = static_cast<double>(sgn(x[0]));
  };
  t.cdf_1d = [](double x) {
    return x < 0.0 ? 0.5 * std::exp(x) : 1.0 - 0.5 * std::exp(-x);
  };
  t.quantile_1d = [](double p) {
    return p < 0.5 ? std::log(2.0 * p) : -std::log(2.0 * (1.0 - p));
  };
  t.log_norm_const = std::log(2.0);
  return t;
}

inline Target make_student_t_1d(double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) {
    throw error("student-t degrees of freedom must be positive, got " +
                std::to_string(nu));
  }
  Target t;
  std::ostringstream id;
  id << "student:" << nu;
  t.id = id.str();
  t.dim = 1;
  const double half = 0.5 * (nu + 1.0);
  t.potential = [=](std::span<const double> x) {
    return half * std::log1p(x[0] * x[0] / nu);
  };
  t.gradient = [=](std::span<const double> x, std::span<double> g) {
    g[0] = (nu + 1.0) * x[0] / (nu + x[0] * x[0]);
  };
  const boost::math::students_t_distribution<double> dist(nu);
  t.cdf_1d = [=](double x) { return boost::math::cdf(dist, x); };
  t.quantile_1d = [=](double p) { return boost::math::quantile(dist, p); };
  t.log_norm_const = 0.5 * std::log(nu * M_PI) + std::lgamma(0.5 * nu) -
                     std::lgamma(0.5 * (nu + 1.0));
  return t;
}

/// Uncorrelated five-dimensional Cauchy: U(x) = 3 log(1 + |x|^2).
inline Target make_cauchy_5d() {
  Target t;
  t.id = "cauchy5d";
  t.dim = 5;
  t.potential = [](std::span<const double> x) { return 3.0 * std::log1p(norm2(x)); };
  t.gradient = [](std::span<const double> x, std::span<double> g) {
    const double c = 6.0 / (1.0 + norm2(x));
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = c * x[i];
  };
  // Z = pi^{5/2} Gamma(1/2) / Gamma(3) = pi^3 / 2.
  t.log_norm_const = 3.0 * std::log(M_PI) - std::log(2.0);
  return t;
}

struct CustomTargetOptions {
  std::string id = "custom";
  std::function<double(double)> cdf_1d;
  std::function<double(double)> quantile_1d;
  std::optional<double> log_norm_const;
  /// Spot checks are drawn uniformly from [-check_radius, check_radius]^d.
  double check_radius = 10.0;
  int check_points = 16;
  double tolerance = 1e-5;
  std::uint64_t check_seed = 0x5eed;
};

/// Wraps user callbacks. Throws gradient_mismatch naming the first point
/// where the finite-difference check fails.
inline Target make_custom(
    std::size_t dim, std::function<double(std::span<const double>)> potential,
    std::function<void(std::span<const double>, std::span<double>)> gradient,
    const CustomTargetOptions& opts = {}) {
  if (dim == 0) throw error("target dimension must be positive");
  Target t;
  t.id = opts.id;
  t.dim = dim;
  t.potential = std::move(potential);
  t.gradient = std::move(gradient);
  t.cdf_1d = opts.cdf_1d;
  t.quantile_1d = opts.quantile_1d;
  t.log_norm_const = opts.log_norm_const;

  Rng rng(opts.check_seed);
  Vec x(dim);
  for (int k = 0; k < opts.check_points; ++k) {
    for (auto& v : x) v = opts.check_radius * (2.0 * rng.uniform() - 1.0);
    const double err = gradient_error(t, x);
    if (!(err <= opts.tolerance)) {
      std::ostringstream os;
      os << "gradient does not match potential at " << format_point(x)
         << " (scaled error " << err << ")";
      throw gradient_mismatch(os.str());
    }
  }
  return t;
}

/// Resolves CLI ids: normal1d, exp1d, student:<nu>, cauchy5d.
inline Target make_target(const std::string& id) {
  if (id == "normal1d") return make_std_normal_1d();
  if (id == "exp1d") return make_symmetric_exponential_1d();
  if (id == "cauchy5d") return make_cauchy_5d();
  const std::string prefix = "student:";
  if (id.rfind(prefix, 0) == 0) {
    const std::string rest = id.substr(prefix.size());
    std::size_t used = 0;
    double nu = 0.0;
    try {
      nu = std::stod(rest, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != rest.size()) {
      throw config_error("target: cannot parse degrees of freedom in '" + id + "'");
    }
    return make_student_t_1d(nu);
  }
  throw config_error("target: unknown id '" + id + "'");
}

}  // namespace suzz
