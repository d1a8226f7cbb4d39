#pragma once

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <sstream>

#include "suzz/core.hpp"
#include "suzz/quadrature.hpp"
#include "suzz/speed.hpp"

namespace suzz {

/// Deterministic motion dX/dt = theta * s(X) from (x, theta).
///
/// The path is the straight line x + theta * u, where the arc parameter u is
/// the distance travelled by every coordinate. Time and arc are related by
/// time_of_arc(u) = int_0^u dv / s(x + theta v). Closed forms are used for
/// constant speeds and poly-radial speeds with epsilon >= 0 (elementary for
/// epsilon in {0, 1}, incomplete beta otherwise); everything else goes
/// through adaptive quadrature and safeguarded Newton.
///
/// Numeric flows memoize time_of_arc at the dyadic arcs base * 2^k. Each
/// cached value is a pure function of k, so results never depend on which
/// queries came first, and concurrent queries agree bit for bit.
class LineFlow {
 public:
  enum class Kind { constant, asinh, atan, beta, numeric };

  LineFlow(Vec origin, Velocity direction, const SpeedFunction& speed)
      : origin_(std::move(origin)), theta_(std::move(direction)), speed_(speed) {
    if (origin_.size() != theta_.size()) throw error("flow: origin and direction sizes differ");
    for (int t : theta_) {
      if (t != 1 && t != -1) throw error("flow: direction entries must be +1 or -1");
    }
    setup();
  }

  const Vec& origin() const { return origin_; }
  const Velocity& direction() const { return theta_; }
  const SpeedFunction& speed() const { return speed_; }
  Kind kind() const { return kind_; }
  std::size_t dim() const { return origin_.size(); }

  /// t*(x, theta); +inf when the flow does not explode.
  double explosion_time() const {
    if (kind_ != Kind::numeric || !explosive_) return explosion_;
    std::call_once(cache_->explosion_once, [this] { cache_->explosion = numeric_explosion_time(); });
    return cache_->explosion;
  }
  bool explosive() const { return explosive_; }

  Vec point_at_arc(double u) const { return along(origin_, theta_, u); }
  double speed_at_arc(double u) const { return speed_(point_at_arc(u)); }

  double time_of_arc(double u) const {
    if (!(u >= 0.0)) throw error("flow: arc distance must be nonnegative");
    if (u == 0.0) return 0.0;
    if (std::isinf(u)) return explosion_time();
    switch (kind_) {
      case Kind::constant:
        return u / k_;
      case Kind::asinh: {
        const double z1 = z0_ + a_ * u / sqrt_d_;
        const double p1 = p_of(z1);
        const double h0 = std::hypot(1.0, z0_), h1 = std::hypot(1.0, z1);
        const double delta = a_ * u / sqrt_d_;
        return std::log1p(delta * (p1 + p0_) / ((h1 + h0) * p0_)) / (k_ * std::sqrt(a_));
      }
      case Kind::atan: {
        const double delta = a_ * u / sqrt_d_;
        const double z1 = z0_ + delta;
        const double m0 = std::max(1.0, std::abs(z0_)), m1 = std::max(1.0, std::abs(z1));
        const double ang = std::atan2(delta / (m0 * m1), 1.0 / (m0 * m1) + (z0_ / m0) * (z1 / m1));
        return ang / (k_ * sqrt_d_);
      }
      case Kind::beta:
        return beta_time_of_arc(u);
      case Kind::numeric:
        return numeric_time_of_arc(u);
    }
    return 0.0;
  }

  /// Inverse of time_of_arc. Throws explosion_error at or within 1e-12 of t*.
  double arc_of_time(double t) const {
    if (!(t >= 0.0)) throw error("flow: time must be nonnegative");
    check_domain(t);
    if (t == 0.0) return 0.0;
    switch (kind_) {
      case Kind::constant:
        return t * k_;
      case Kind::asinh: {
        const double tau = k_ * std::sqrt(a_) * t;
        const double delta = 0.5 * std::expm1(tau) * (p0_ + std::exp(-tau) / p0_);
        return delta * sqrt_d_ / a_;
      }
      case Kind::atan: {
        const double tau = k_ * sqrt_d_ * t;
        const double delta = std::sin(tau) * std::hypot(1.0, z0_) / std::sin(tail0_ - tau);
        return delta * sqrt_d_ / a_;
      }
      case Kind::beta:
        return beta_arc_of_time(t);
      case Kind::numeric:
        return numeric_arc_of_time(t);
    }
    return 0.0;
  }

  /// Phi_{(x, theta)}(t).
  Vec position_at(double t) const { return point_at_arc(arc_of_time(t)); }

  /// Time needed to travel arc distance u; always below the explosion time.
  double time_to_reach(double u) const { return time_of_arc(u); }

 private:
  static constexpr double kNodeBase = 1.0 / 64.0;
  static constexpr double kMaxArc = 1e300;

  static double p_of(double z) {
    const double h = std::hypot(1.0, z);
    return z >= 0.0 ? z + h : 1.0 / (h - z);
  }

  void setup() {
    const double d = static_cast<double>(origin_.size());
    k_ = speed_.scale;
    if (speed_.family == SpeedFamily::constant) {
      kind_ = Kind::constant;
      explosion_ = kInf;
      explosive_ = false;
      return;
    }
    if (speed_.family == SpeedFamily::poly_radial && speed_.epsilon >= 0.0) {
      // Along the line 1 + |x + theta v|^2 = a v^2 + 2 b v + c.
      a_ = d;
      b_ = 0.0;
      for (std::size_t i = 0; i < origin_.size(); ++i) b_ += theta_[i] * origin_[i];
      // D = a c - b^2 = a + sum_{i<j} (theta_i x_j - theta_j x_i)^2 (Lagrange).
      double disc = a_;
      for (std::size_t i = 0; i < origin_.size(); ++i) {
        for (std::size_t j = i + 1; j < origin_.size(); ++j) {
          const double w = theta_[i] * origin_[j] - theta_[j] * origin_[i];
          disc += w * w;
        }
      }
      sqrt_d_ = std::sqrt(disc);
      z0_ = b_ / sqrt_d_;
      if (speed_.epsilon != 0.0 && speed_.epsilon != 1.0) {
        setup_beta();
      } else if (speed_.epsilon == 0.0) {
        kind_ = Kind::asinh;
        p0_ = p_of(z0_);
        explosion_ = kInf;
        explosive_ = false;
      } else {
        kind_ = Kind::atan;
        tail0_ = z0_ > 0.0 ? std::atan(1.0 / z0_) : M_PI_2 - std::atan(z0_);
        explosion_ = tail0_ / (k_ * sqrt_d_);
        explosive_ = true;
      }
      return;
    }
    kind_ = Kind::numeric;
    cache_ = std::make_shared<Cache>();
    if (speed_.family == SpeedFamily::poly_radial) {
      // (1 + |x|^2)^{-(1+eps)/2} is integrable along a line iff eps > 0.
      explosive_ = speed_.epsilon > 0.0;
    } else {
      cache_->explosion = numeric_explosion_time();
      std::call_once(cache_->explosion_once, [] {});
      explosive_ = std::isfinite(cache_->explosion);
    }
  }

  // Poly-radial speed with p = (1 + eps) / 2 > 1/2. Writing
  // 1 + |x + theta v|^2 = a (1 + z^2) kappa^2 with z = (v + b / a) / kappa and
  // kappa = sqrt(D) / a gives dt = C dz / (1 + z^2)^p, C = kappa^{1-2p} a^{-p} / k.
  // With F(z) = int_0^z (1 + y^2)^{-p} dy, substituting y^2 / (1 + y^2)
  // turns F and its tail H - F into incomplete beta functions, H = B(1/2, p - 1/2) / 2.
  void setup_beta() {
    kind_ = Kind::beta;
    bp_ = 0.5 * (1.0 + speed_.epsilon);
    kappa_ = sqrt_d_ / a_;
    log_c_ = (1.0 - 2.0 * bp_) * std::log(kappa_) - bp_ * std::log(a_) - std::log(k_);
    half_beta_ = 0.5 * boost::math::beta(0.5, bp_ - 0.5);
    remaining0_ = remaining(z0_);
    head0_ = z0_ >= 0.0 ? beta_head(z0_) : -beta_head(-z0_);
    lower0_ = z0_ >= 0.0 ? half_beta_ + head0_ : beta_tail(-z0_);
    explosion_ = std::exp(log_c_) * remaining0_;
    explosive_ = true;
  }

  /// H - F(z) for z >= 0.
  double beta_tail(double z) const {
    const double z2 = z * z;
    if (z2 >= 1.0) return half_beta_ * boost::math::ibeta(bp_ - 0.5, 0.5, 1.0 / (1.0 + z2));
    return half_beta_ * boost::math::ibetac(0.5, bp_ - 0.5, z2 / (1.0 + z2));
  }

  /// F(z) for z >= 0.
  double beta_head(double z) const {
    const double z2 = z * z;
    if (z2 <= 1.0) return half_beta_ * boost::math::ibeta(0.5, bp_ - 0.5, z2 / (1.0 + z2));
    return half_beta_ * boost::math::ibetac(bp_ - 0.5, 0.5, 1.0 / (1.0 + z2));
  }

  /// H - F(z) for any z, in (0, 2H).
  double remaining(double z) const {
    return z >= 0.0 ? beta_tail(z) : half_beta_ + beta_head(-z);
  }

  /// z with F(z) = f, given also r = H - f and l = H + f computed without
  /// cancellation; the smaller of each pair drives the inversion.
  double beta_inverse(double f, double r, double l) const {
    const double sign = f >= 0.0 ? 1.0 : -1.0;
    const double head = std::abs(f) / half_beta_;
    if (head <= 0.5) {
      const double b = boost::math::ibeta_inv(0.5, bp_ - 0.5, head);  // z^2 / (1 + z^2)
      return sign * std::sqrt(b / (1.0 - b));
    }
    const double tail = std::max(0.0, (f >= 0.0 ? r : l) / half_beta_);
    const double y = boost::math::ibeta_inv(bp_ - 0.5, 0.5, tail);  // 1 / (1 + z^2)
    return sign * std::sqrt((1.0 - y) / y);
  }

  double beta_time_of_arc(double u) const {
    const double dz = u / kappa_;
    if (dz <= 0.25 * std::abs(z0_)) {
      // Short arcs: direct quadrature avoids cancellation in F(z1) - F(z0).
      return integrate_inverse_speed(0.0, u);
    }
    const double z1 = z0_ + dz;
    double diff;
    if (z0_ >= 0.0) {
      diff = z0_ >= 1.0 ? beta_tail(z0_) - beta_tail(z1) : beta_head(z1) - beta_head(z0_);
    } else if (z1 <= 0.0) {
      diff = -z1 >= 1.0 ? beta_tail(-z1) - beta_tail(-z0_) : beta_head(-z0_) - beta_head(-z1);
    } else {
      diff = beta_head(z1) + beta_head(-z0_);
    }
    return std::exp(log_c_) * diff;
  }

  double beta_arc_of_time(double t) const {
    const double dt = t * std::exp(-log_c_);
    const double z1 = beta_inverse(head0_ + dt, remaining0_ - dt, lower0_ + dt);
    double u = std::max(0.0, (z1 - z0_) * kappa_);
    if (u / kappa_ > 0.25 * std::abs(z0_)) return u;
    // Short arcs lose digits to z1 - z0: polish against the forward map.
    for (int it = 0; it < 3; ++it) {
      const double step = (time_of_arc(u) - t) * speed_at_arc(u);
      const double next = u - step;
      if (!(next > 0.0) || !std::isfinite(next)) break;
      u = next;
      if (std::abs(step) <= 1e-15 * u) break;
    }
    return u;
  }

  void check_domain(double t) const {
    const double tstar = explosion_time();
    if (std::isfinite(tstar) && t >= tstar - 1e-12 * std::max(1.0, tstar)) {
      std::ostringstream os;
      os.precision(17);
      os << "flow queried at t=" << t << " at or beyond explosion time " << tstar
         << " from " << format_point(origin_);
      throw explosion_error(os.str());
    }
    if (!std::isfinite(t)) throw explosion_error("flow queried at infinite time");
  }

  double inverse_speed(double v) const { return 1.0 / speed_(point_at_arc(v)); }

  double integrate_inverse_speed(double lo, double hi) const {
    if (hi <= lo) return 0.0;
    return quad::integrate([this](double v) { return inverse_speed(v); }, lo, hi, 1e-14).value;
  }

  double numeric_explosion_time() const {
    if (speed_.family == SpeedFamily::poly_radial && speed_.epsilon <= 0.0) return kInf;
    try {
      const auto r = quad::integrate_algebraic_tail([this](double v) { return inverse_speed(v); },
                                                    0.0, 1e-14);
      if (std::isfinite(r.value) && r.error <= 1e-8 * std::max(r.value, 1e-300)) return r.value;
    } catch (const std::exception&) {
    }
    if (speed_.family == SpeedFamily::poly_radial) {
      throw quadrature_error("flow: explosion time quadrature did not converge");
    }
    // Custom speed whose reciprocal does not integrate: treat as non-explosive.
    return kInf;
  }

  struct Cache {
    std::mutex mu;
    std::once_flag explosion_once;
    double explosion = kInf;
    Vec node_times;  // node_times[k] = time_of_arc(kNodeBase * 2^k)
  };

  static double node_arc(std::size_t k) { return std::ldexp(kNodeBase, static_cast<int>(k)); }

  /// time_of_arc at node k, extending the cache as needed.
  double node_time(std::size_t k) const {
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto& nt = cache_->node_times;
    while (nt.size() <= k) {
      const std::size_t j = nt.size();
      const double prev_arc = j == 0 ? 0.0 : node_arc(j - 1);
      const double prev_time = j == 0 ? 0.0 : nt[j - 1];
      nt.push_back(prev_time + integrate_inverse_speed(prev_arc, node_arc(j)));
    }
    return nt[k];
  }

  /// Index of the largest node not above u, or -1 if u < kNodeBase.
  static long node_below(double u) {
    if (u < kNodeBase) return -1;
    int e = 0;
    std::frexp(u / kNodeBase, &e);  // u / base in [2^{e-1}, 2^e)
    long k = e - 1;
    while (k > 0 && node_arc(static_cast<std::size_t>(k)) > u) --k;
    while (node_arc(static_cast<std::size_t>(k + 1)) <= u) ++k;
    return k;
  }

  double numeric_time_of_arc(double u) const {
    if (u > kMaxArc) throw explosion_error("flow: arc distance beyond representable range");
    const long k = node_below(u);
    if (k < 0) return integrate_inverse_speed(0.0, u);
    const double base = node_arc(static_cast<std::size_t>(k));
    return node_time(static_cast<std::size_t>(k)) + integrate_inverse_speed(base, u);
  }

  double numeric_arc_of_time(double t) const {
    // Bracket between consecutive nodes.
    double lo = 0.0, hi = kNodeBase;
    double t_lo = 0.0;
    if (node_time(0) < t) {
      std::size_t k = 0;
      while (node_time(k + 1) < t) {
        ++k;
        if (node_arc(k + 1) > kMaxArc) {
          throw explosion_error("flow: time not reached before arc guard; flow escapes");
        }
      }
      lo = node_arc(k);
      hi = node_arc(k + 1);
      t_lo = node_time(k);
    }
    // Safeguarded Newton on T(u) - t, carrying T at the current iterate so
    // each step integrates only the increment.
    double u = lo, tu = t_lo;
    for (int it = 0; it < 100; ++it) {
      double next = u + (t - tu) * speed_at_arc(u);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const double tn = next >= u ? tu + integrate_inverse_speed(u, next)
                                  : tu - integrate_inverse_speed(next, u);
      if (tn < t) {
        lo = next;
      } else {
        hi = next;
      }
      const double step = std::abs(next - u);
      u = next;
      tu = tn;
      // Quadratic convergence: a step this small leaves an error far below it.
      if (tn == t || step <= 1e-9 * u || hi - lo <= 4e-16 * u) break;
    }
    return u;
  }

  Vec origin_;
  Velocity theta_;
  SpeedFunction speed_;
  Kind kind_ = Kind::constant;
  double k_ = 1.0;  // speed scale
  // Quadratic-family parameters: q(v) = a v^2 + 2 b v + c, D = a c - b^2.
  double a_ = 0.0, b_ = 0.0, sqrt_d_ = 1.0, z0_ = 0.0, p0_ = 1.0, tail0_ = 0.0;
  double bp_ = 1.0, kappa_ = 1.0, log_c_ = 0.0, half_beta_ = 0.0, remaining0_ = 0.0;
  double head0_ = 0.0, lower0_ = 0.0;
  double explosion_ = kInf;
  bool explosive_ = false;
  std::shared_ptr<Cache> cache_;
};

inline LineFlow make_flow(Vec x, Velocity theta, const SpeedFunction& speed) {
  return LineFlow(std::move(x), std::move(theta), speed);
}

}  // namespace suzz
