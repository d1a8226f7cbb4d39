#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>

#include "suzz/core.hpp"
#include "suzz/flow.hpp"
#include "suzz/quadrature.hpp"
#include "suzz/speed.hpp"

namespace suzz {

enum class ArrivalStrategy { exact_inversion, grid_thinning };

/// First event of the inhomogeneous Poisson process with intensity
/// lambda(Phi(t), theta) along a flow.
struct Arrival {
  double tau = kInf;         // time from the flow origin
  double arc = kInf;         // arc distance travelled
  Vec x;                     // landing point
  int coordinate = -1;       // 0-based index of the flipped coordinate
  std::uint64_t proposals = 0;

  bool escaped() const { return !std::isfinite(tau); }
};

namespace detail {

/// Arc distance to the boundary of the target's domain along the flow.
inline double arc_limit(const RateSpec& rs, const LineFlow& flow) {
  if (!rs.target.bounded_domain()) return kInf;
  double lim = kInf;
  const auto& x = flow.origin();
  const auto& th = flow.direction();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = th[i] > 0 ? rs.target.domain_upper[i] - x[i] : x[i] - rs.target.domain_lower[i];
    lim = std::min(lim, d);
  }
  return lim;
}

/// Picks coordinate i with probability lambda_i / lambda using one uniform.
inline int select_coordinate(const Vec& lam, double uniform) {
  double total = 0.0;
  for (double l : lam) total += l;
  if (!(total > 0.0)) {
    return static_cast<int>(std::max_element(lam.begin(), lam.end()) - lam.begin());
  }
  const double target = uniform * total;
  double cum = 0.0;
  for (std::size_t i = 0; i < lam.size(); ++i) {
    cum += lam[i];
    if (target < cum) return static_cast<int>(i);
  }
  // uniform * total rounded up to total: take the last coordinate with mass.
  for (std::size_t i = lam.size(); i-- > 0;) {
    if (lam[i] > 0.0) return static_cast<int>(i);
  }
  return 0;
}

}  // namespace detail

/// Lambda(t) = int_0^t lambda(Phi(r), theta) dr, evaluated in arc
/// coordinates as int_0^{u(t)} lambda / s dv.
inline double integrated_rate_arc(const RateSpec& rs, const LineFlow& flow, double u) {
  if (u <= 0.0) return 0.0;
  auto f = [&](double v) { return rate_per_arc(rs, flow.point_at_arc(v), flow.direction()); };
  return quad::integrate(f, 0.0, u, 1e-13).value;
}

inline double integrated_rate(const RateSpec& rs, const LineFlow& flow, double t) {
  return integrated_rate_arc(rs, flow, flow.arc_of_time(t));
}

class ArrivalSampler {
 public:
  ArrivalStrategy strategy = ArrivalStrategy::exact_inversion;
  int grid_points = 64;
  double safety = 1.5;
  /// Initial look-ahead horizon, in time units.
  double horizon = 1.0;
  /// Lambda must grow by more than this per doubling once past escape_time.
  double escape_increment = 1e-12;
  double escape_time = 1e6;

  ArrivalSampler() = default;
  explicit ArrivalSampler(ArrivalStrategy s) : strategy(s) {}

  static ArrivalSampler thinning(int grid = 64, double safety_factor = 1.5) {
    ArrivalSampler a(ArrivalStrategy::grid_thinning);
    a.grid_points = grid;
    a.safety = safety_factor;
    a.validate();
    return a;
  }

  void validate() const {
    if (strategy == ArrivalStrategy::grid_thinning) {
      if (safety < 1.2) throw error("thinning safety factor must be at least 1.2");
      if (grid_points < 2) throw error("thinning grid needs at least two points");
    }
    if (!(horizon > 0.0)) throw error("arrival horizon must be positive");
  }

  Arrival first_arrival(const RateSpec& rs, const LineFlow& flow, Rng& rng) const {
    validate();
    return strategy == ArrivalStrategy::exact_inversion ? invert(rs, flow, rng)
                                                         : thin(rs, flow, rng);
  }

 private:
  // Absolute accuracy demanded of integrated-rate pieces when solving
  // Lambda = e.
  static double abs_tol(double e) { return 1e-16 * std::max(1.0, e); }

  // Solves Lambda(u) = E for the arc u by marching doubling windows and
  // safeguarded Newton inside the window that crosses E.
  Arrival invert(const RateSpec& rs, const LineFlow& flow, Rng& rng) const {
    const double e = rng.exponential();
    const double pick = rng.uniform();
    const auto& theta = flow.direction();
    auto f = [&](double v) { return rate_per_arc(rs, flow.point_at_arc(v), theta); };

    const double limit = detail::arc_limit(rs, flow);
    double a = 0.0;
    double acc = 0.0;
    double h = horizon * flow.speed_at_arc(0.0);
    Arrival out;
    for (int step = 0;; ++step) {
      if (step > 4000) throw guard_violation("arrival: too many look-ahead windows");
      double b = a + h;
      if (std::isfinite(limit)) {
        const double room = limit - a;
        if (room <= 1e-12 * std::max(1.0, std::abs(limit))) {
          throw explosion_error("arrival: path reached the boundary of the target domain");
        }
        b = std::min(b, a + 0.5 * room);
      }
      if (b > 1e300) {
        if (flow.explosive()) {
          throw explosion_error("arrival: flow exploded before any event (graveyard reached)");
        }
        out.proposals = static_cast<std::uint64_t>(step);
        return out;  // escape
      }
      const double piece = quad::integrate(f, a, b, 1e-13, 2000, abs_tol(e)).value;
      if (acc + piece >= e) {
        const double u = solve_in_window(f, a, b, e - acc, abs_tol(e));
        out.arc = u;
        out.tau = flow.time_of_arc(u);
        out.x = flow.point_at_arc(u);
        out.coordinate = detail::select_coordinate(rates(rs, out.x, theta), pick);
        out.proposals = 1;
        return out;
      }
      acc += piece;
      if (!flow.explosive() && flow.time_of_arc(b) >= escape_time && piece < escape_increment) {
        out.proposals = static_cast<std::uint64_t>(step);
        return out;  // Lambda plateaued: no-event escape
      }
      a = b;
      h *= 2.0;
    }
  }

  // Root of int_a^u f = target on [a, b], f >= 0 and int_a^b f >= target.
  // Safeguarded Newton; G = int_a^u f - target is carried along the
  // iterates so each step integrates only the increment.
  template <class F>
  static double solve_in_window(const F& f, double a, double b, double target, double atol) {
    double lo = a, hi = b;
    double u = a;
    double g = -target;
    double fu = f(a);
    for (int it = 0; it < 200; ++it) {
      double next = fu > 0.0 ? u - g / fu : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const double gn = next >= u ? g + quad::integrate(f, u, next, 1e-13, 2000, atol).value
                                  : g - quad::integrate(f, next, u, 1e-13, 2000, atol).value;
      if (gn < 0.0) {
        lo = next;
      } else {
        hi = next;
      }
      const double step = std::abs(next - u);
      u = next;
      g = gn;
      if (gn == 0.0) return u;
      fu = f(u);
      const double scale = std::max(1.0, std::abs(u));
      // Newton steps below 1e-9 leave a residual of order step^2.
      if (step <= 1e-9 * scale || hi - lo <= 4e-16 * scale || std::abs(gn) <= 10.0 * atol) {
        return u;
      }
    }
    return u;
  }

  // Thinning in time units over look-ahead windows [t0, t1] with a
  // grid-maximum bound. A proposal whose true rate exceeds the bound aborts.
  Arrival thin(const RateSpec& rs, const LineFlow& flow, Rng& rng) const {
    const auto& theta = flow.direction();
    const double tstar = flow.explosion_time();
    auto rate_at = [&](double t) -> std::pair<double, Vec> {
      Vec x = flow.position_at(t);
      return {total_rate(rs, x, theta), x};
    };
    double t0 = 0.0;
    double h = horizon;
    Arrival out;
    for (int window = 0;; ++window) {
      if (window > 100000) throw guard_violation("thinning: too many look-ahead windows");
      double t1 = t0 + h;
      if (std::isfinite(tstar)) t1 = std::min(t1, t0 + 0.9 * (tstar - t0));
      double bound = 0.0;
      for (int j = 0; j < grid_points; ++j) {
        const double t = t0 + (t1 - t0) * j / (grid_points - 1);
        bound = std::max(bound, rate_at(t).first);
      }
      bound *= safety;
      if (bound > 0.0) {
        double t = t0;
        for (;;) {
          t += rng.exponential() / bound;
          if (t >= t1) break;
          ++out.proposals;
          auto [lam, x] = rate_at(t);
          if (lam > bound) {
            std::ostringstream os;
            os.precision(17);
            os << "thinning bound " << bound << " violated by rate " << lam << " at t=" << t
               << " in window [" << t0 << ", " << t1 << "]";
            throw thinning_bound_violation(os.str());
          }
          if (rng.uniform() * bound < lam) {
            out.tau = t;
            out.x = std::move(x);
            out.arc = flow.arc_of_time(t);
            out.coordinate = detail::select_coordinate(rates(rs, out.x, theta), rng.uniform());
            return out;
          }
        }
      }
      t0 = t1;
      if (!std::isfinite(tstar) && t0 >= escape_time) return out;  // escape
      if (std::isfinite(tstar) && tstar - t0 <= 1e-12 * std::max(1.0, tstar)) {
        throw explosion_error("thinning: flow exploded before any event (graveyard reached)");
      }
      h *= 2.0;
    }
  }
};

}  // namespace suzz
