#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <string>

#include "suzz/core.hpp"
#include "suzz/targets.hpp"

namespace suzz {

enum class SpeedFamily { constant, poly_radial, custom };

/// Positive speed field s(x). `scale` multiplies the family's base shape, so
/// constant speeds and rescaled poly-radial speeds keep their closed-form
/// flows.
struct SpeedFunction {
  std::string id;
  SpeedFamily family = SpeedFamily::constant;
  double scale = 1.0;
  /// Only meaningful for poly_radial: s(x) = scale * (1 + |x|^2)^{(1+eps)/2}.
  double epsilon = 0.0;
  std::function<double(std::span<const double>)> value;
  std::function<void(std::span<const double>, std::span<double>)> gradient;

  double operator()(std::span<const double> x) const { return value(x); }
  double at1(double x) const { return value(std::span<const double>(&x, 1)); }
  double d1(double x) const {
    double g = 0.0;
    gradient(std::span<const double>(&x, 1), std::span<double>(&g, 1));
    return g;
  }
  bool is_constant() const { return family == SpeedFamily::constant; }
};

inline SpeedFunction constant_speed(double c = 1.0) {
  if (!(c > 0.0) || !std::isfinite(c)) throw error("constant speed must be positive");
  SpeedFunction s;
  s.id = c == 1.0 ? "unit" : "const:" + std::to_string(c);
  s.family = SpeedFamily::constant;
  s.scale = c;
  s.value = [c](std::span<const double>) { return c; };
  s.gradient = [](std::span<const double>, std::span<double> g) {
    for (auto& v : g) v = 0.0;
  };
  return s;
}

inline SpeedFunction unit_speed() { return constant_speed(1.0); }

/// s(x) = scale * (1 + |x|^2)^{(1+eps)/2}.
inline SpeedFunction poly_radial(double eps, double scale = 1.0) {
  if (!std::isfinite(eps) || !(eps > -1.0)) throw error("poly speed exponent must exceed -1");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw error("speed scale must be positive");
  SpeedFunction s;
  std::ostringstream id;
  id << "poly:" << eps;
  s.id = id.str();
  s.family = SpeedFamily::poly_radial;
  s.epsilon = eps;
  s.scale = scale;
  const double p = 0.5 * (1.0 + eps);
  s.value = [=](std::span<const double> x) { return scale * std::pow(1.0 + norm2(x), p); };
  s.gradient = [=](std::span<const double> x, std::span<double> g) {
    const double c = scale * (1.0 + eps) * std::pow(1.0 + norm2(x), p - 1.0);
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = c * x[i];
  };
  return s;
}

inline SpeedFunction custom_speed(
    std::function<double(std::span<const double>)> value,
    std::function<void(std::span<const double>, std::span<double>)> gradient,
    std::string id = "custom") {
  SpeedFunction s;
  s.id = std::move(id);
  s.family = SpeedFamily::custom;
  s.value = std::move(value);
  s.gradient = std::move(gradient);
  return s;
}

/// c * s, keeping closed-form metadata.
inline SpeedFunction scaled(const SpeedFunction& s, double c) {
  if (!(c > 0.0)) throw error("speed scale must be positive");
  switch (s.family) {
    case SpeedFamily::constant:
      return constant_speed(s.scale * c);
    case SpeedFamily::poly_radial:
      return poly_radial(s.epsilon, s.scale * c);
    case SpeedFamily::custom:
      break;
  }
  auto v = s.value;
  auto g = s.gradient;
  return custom_speed([v, c](std::span<const double> x) { return c * v(x); },
                      [g, c](std::span<const double> x, std::span<double> out) {
                        g(x, out);
                        for (auto& e : out) e *= c;
                      },
                      s.id + "*" + std::to_string(c));
}

/// CLI ids: "unit" and "poly:<epsilon>".
inline SpeedFunction make_speed(const std::string& id) {
  if (id == "unit") return unit_speed();
  const std::string prefix = "poly:";
  if (id.rfind(prefix, 0) == 0) {
    const std::string rest = id.substr(prefix.size());
    std::size_t used = 0;
    double eps = 0.0;
    try {
      eps = std::stod(rest, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != rest.size()) {
      throw config_error("speed: cannot parse epsilon in '" + id + "'");
    }
    return poly_radial(eps);
  }
  throw config_error("speed: unknown id '" + id + "'");
}

/// Target, speed and per-coordinate refresh constants gamma_i >= 0.
struct RateSpec {
  Target target;
  SpeedFunction speed;
  Vec refresh;  // empty means all zero

  RateSpec() = default;
  RateSpec(Target t, SpeedFunction s, Vec gamma = {})
      : target(std::move(t)), speed(std::move(s)), refresh(std::move(gamma)) {
    if (!refresh.empty() && refresh.size() != target.dim) {
      throw error("refresh vector length must equal the target dimension");
    }
    for (double g : refresh) {
      if (!(g >= 0.0) || !std::isfinite(g)) throw error("refresh rates must be nonnegative");
    }
  }

  std::size_t dim() const { return target.dim; }
  double gamma(std::size_t i) const { return refresh.empty() ? 0.0 : refresh[i]; }
};

/// A_i(x) = s(x) dU/dx_i - ds/dx_i.
inline Vec A(const RateSpec& rs, std::span<const double> x) {
  const std::size_t d = rs.dim();
  Vec gu(d), gs(d);
  rs.target.gradient(x, gu);
  rs.speed.gradient(x, gs);
  const double s = rs.speed(x);
  for (std::size_t i = 0; i < d; ++i) gu[i] = s * gu[i] - gs[i];
  return gu;
}

/// Per-coordinate switching rates lambda_i = [theta_i A_i]^+ + gamma_i.
inline Vec rates(const RateSpec& rs, std::span<const double> x, const Velocity& theta) {
  Vec a = A(rs, x);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = positive_part(theta[i] * a[i]) + rs.gamma(i);
  return a;
}

/// lambda_i with a 0-based coordinate index.
inline double rate(const RateSpec& rs, std::span<const double> x, const Velocity& theta,
                   std::size_t i) {
  if (i >= rs.dim()) throw error("rate: coordinate index out of range");
  return rates(rs, x, theta)[i];
}

inline double total_rate(const RateSpec& rs, std::span<const double> x, const Velocity& theta) {
  double sum = 0.0;
  for (double l : rates(rs, x, theta)) sum += l;
  return sum;
}

/// lambda(x, theta) / s(x): the event intensity per unit of arc length.
inline double rate_per_arc(const RateSpec& rs, std::span<const double> x,
                           const Velocity& theta) {
  const std::size_t d = rs.dim();
  Vec gu(d), gs(d);
  rs.target.gradient(x, gu);
  rs.speed.gradient(x, gs);
  const double s = rs.speed(x);
  double sum = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    // [theta_i (dU_i - ds_i / s)]^+ + gamma_i / s
    sum += positive_part(theta[i] * (gu[i] - gs[i] / s)) + rs.gamma(i) / s;
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Assumption audit

struct RayAudit {
  Vec direction;
  Vec log_growth;           // log(e^{-U} s) along the radii
  Vec log_nonevanescence;   // log(r^{d-1} e^{-U} s)
  bool growth_ok = true;
  bool nonevanescence_ok = true;
};

struct AuditReport {
  Vec radii;
  std::vector<RayAudit> rays;
  bool pass = true;
  std::string message;
};

namespace detail {
// The tail (second half of the grid) must strictly decrease by a margin
// that rules out a numerically flat sequence.
inline bool decreasing_tail(const Vec& logs) {
  const std::size_t n = logs.size();
  if (n < 2) return true;
  for (std::size_t k = n / 2; k + 1 < n; ++k) {
    if (!std::isfinite(logs[k + 1])) {
      if (logs[k + 1] == -kInf) continue;
      return false;
    }
    if (!(logs[k + 1] < logs[k] - 1e-9 * (1.0 + std::abs(logs[k])))) return false;
  }
  return true;
}
}  // namespace detail

/// Advisory check of speed growth (e^{-U} s -> 0) and non-evanescence
/// (r^{d-1} e^{-U} s -> 0) along the given rays.
inline AuditReport audit_assumptions(const RateSpec& rs, const std::vector<Vec>& rays,
                                     const Vec& radii) {
  for (std::size_t k = 1; k < radii.size(); ++k) {
    if (!(radii[k] > radii[k - 1])) throw error("audit radii must be increasing");
  }
  AuditReport rep;
  rep.radii = radii;
  const double d = static_cast<double>(rs.dim());
  std::ostringstream msg;
  for (const auto& ray : rays) {
    if (ray.size() != rs.dim()) throw error("audit ray has wrong dimension");
    const double n = std::sqrt(norm2(ray));
    RayAudit ra;
    ra.direction = ray;
    Vec x(rs.dim());
    for (double r : radii) {
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = r * ray[i] / n;
      const double lg = -rs.target.U(x) + std::log(rs.speed(x));
      ra.log_growth.push_back(lg);
      ra.log_nonevanescence.push_back(lg + (d - 1.0) * std::log(r));
    }
    ra.growth_ok = detail::decreasing_tail(ra.log_growth);
    ra.nonevanescence_ok = detail::decreasing_tail(ra.log_nonevanescence);
    if (!ra.growth_ok) msg << "speed growth tail not decreasing along " << format_point(ray) << "; ";
    if (!ra.nonevanescence_ok)
      msg << "non-evanescence tail not decreasing along " << format_point(ray) << "; ";
    rep.pass = rep.pass && ra.growth_ok && ra.nonevanescence_ok;
    rep.rays.push_back(std::move(ra));
  }
  rep.message = msg.str();
  return rep;
}

/// Audit along +-e_i and the +-diagonal over radii 10^{0..8}.
inline AuditReport audit_assumptions(const RateSpec& rs) {
  const std::size_t d = rs.dim();
  std::vector<Vec> rays;
  for (std::size_t i = 0; i < d; ++i) {
    Vec e(d, 0.0);
    e[i] = 1.0;
    rays.push_back(e);
    e[i] = -1.0;
    rays.push_back(e);
  }
  if (d > 1) {
    rays.emplace_back(d, 1.0);
    rays.emplace_back(d, -1.0);
  }
  Vec radii;
  for (int k = 0; k <= 16; ++k) radii.push_back(std::pow(10.0, 0.5 * k));
  return audit_assumptions(rs, rays, radii);
}

}  // namespace suzz
