#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <vector>

#include "suzz/core.hpp"
#include "suzz/events.hpp"
#include "suzz/flow.hpp"
#include "suzz/quadrature.hpp"
#include "suzz/speed.hpp"

namespace suzz {

struct Event {
  double t = 0.0;
  Vec x;
  Velocity theta;  // velocity after the event
  int flip = 0;    // 1-based flipped coordinate, 0 for the initial event
};

/// The piecewise trajectory: between consecutive events the path is the
/// LineFlow started at the earlier event.
struct EventChain {
  RateSpec spec;
  std::vector<Event> events;
  double t_end = 0.0;
  Vec x_end;
  Velocity theta_end;
  std::uint64_t proposals = 0;

  std::size_t switches() const { return events.empty() ? 0 : events.size() - 1; }
  std::size_t dim() const { return spec.dim(); }
};

struct Guards {
  std::uint64_t max_proposals = 100'000'000;
  double max_coordinate = 1e300;
};

struct SamplerOptions {
  ArrivalSampler arrival;
  Guards guards;
};

namespace detail {

inline void check_state(std::span<const double> x, const Guards& g) {
  for (double v : x) {
    if (!std::isfinite(v) || std::abs(v) > g.max_coordinate) {
      throw guard_violation("coordinate guard: |x_i| exceeded " + std::to_string(g.max_coordinate) +
                            " at " + format_point(x));
    }
  }
}

inline void check_start(const RateSpec& rs, std::span<const double> x0, const Velocity& theta0) {
  if (x0.size() != rs.dim() || theta0.size() != rs.dim()) {
    throw error("initial state dimension does not match the target");
  }
  for (int t : theta0) {
    if (t != 1 && t != -1) throw error("initial velocity entries must be +1 or -1");
  }
  const double u = rs.target.U(x0);
  if (!std::isfinite(u)) throw error("potential is not finite at the initial point");
}

// Shared event loop. `stop_time` bounds the run in time, `max_switches` in
// switches; whichever binds first ends it.
inline EventChain run(const RateSpec& rs, Vec x0, Velocity theta0, std::size_t max_switches,
                      double stop_time, Rng& rng, const SamplerOptions& opts) {
  check_start(rs, x0, theta0);
  opts.arrival.validate();
  EventChain chain;
  chain.spec = rs;
  chain.events.push_back({0.0, x0, theta0, 0});
  double t = 0.0;
  Vec x = std::move(x0);
  Velocity theta = std::move(theta0);
  while (chain.switches() < max_switches) {
    LineFlow flow(x, theta, rs.speed);
    const Arrival arr = opts.arrival.first_arrival(rs, flow, rng);
    chain.proposals += std::max<std::uint64_t>(arr.proposals, 1);
    if (chain.proposals > opts.guards.max_proposals) {
      throw guard_violation("event budget exceeded: more than " +
                            std::to_string(opts.guards.max_proposals) + " proposed events");
    }
    if (arr.escaped()) {
      std::ostringstream os;
      os << "no-event escape: integrated rate stopped growing from " << format_point(x)
         << " after " << chain.switches() << " switches";
      throw no_event_escape(os.str());
    }
    if (t + arr.tau > stop_time) {
      const double rest = stop_time - t;
      x = flow.position_at(rest);
      t = stop_time;
      break;
    }
    t += arr.tau;
    x = arr.x;
    check_state(x, opts.guards);
    theta[arr.coordinate] = -theta[arr.coordinate];
    chain.events.push_back({t, x, theta, arr.coordinate + 1});
  }
  chain.t_end = t;
  chain.x_end = std::move(x);
  chain.theta_end = std::move(theta);
  return chain;
}

}  // namespace detail

/// Runs until exactly n_switches direction flips have occurred.
inline EventChain run_until_switches(const RateSpec& rs, Vec x0, Velocity theta0,
                                     std::size_t n_switches, Rng& rng,
                                     const SamplerOptions& opts = {}) {
  return detail::run(rs, std::move(x0), std::move(theta0), n_switches, kInf, rng, opts);
}

/// Runs until time t_end; the final state is the flow position at t_end.
inline EventChain run_until_time(const RateSpec& rs, Vec x0, Velocity theta0, double t_end,
                                 Rng& rng, const SamplerOptions& opts = {}) {
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw error("t_end must be finite and nonnegative");
  return detail::run(rs, std::move(x0), std::move(theta0), SIZE_MAX, t_end, rng, opts);
}

/// Default start: the origin moving in the all-plus direction.
inline std::pair<Vec, Velocity> default_start(const RateSpec& rs) {
  return {Vec(rs.dim(), 0.0), Velocity(rs.dim(), 1)};
}

// ---------------------------------------------------------------------------
// Segment access

/// One deterministic piece of a chain: the flow from `start` for `duration`
/// time units, covering `arc` of distance.
struct Segment {
  double t0 = 0.0;
  double duration = 0.0;
  double arc = 0.0;
  const Vec* start = nullptr;
  const Velocity* theta = nullptr;
};

/// Visits every segment of the chain in time order, including the final
/// partial one ending at t_end.
template <class Visit>
void for_each_segment(const EventChain& chain, Visit&& visit) {
  const auto& ev = chain.events;
  for (std::size_t k = 0; k < ev.size(); ++k) {
    const bool last = k + 1 == ev.size();
    const double t1 = last ? chain.t_end : ev[k + 1].t;
    const Vec& x1 = last ? chain.x_end : ev[k + 1].x;
    Segment seg;
    seg.t0 = ev[k].t;
    seg.duration = t1 - ev[k].t;
    double arc = 0.0;
    for (std::size_t i = 0; i < x1.size(); ++i) arc = std::max(arc, std::abs(x1[i] - ev[k].x[i]));
    seg.arc = arc;
    seg.start = &ev[k].x;
    seg.theta = &ev[k].theta;
    if (seg.duration <= 0.0) continue;
    visit(seg);
  }
}

// ---------------------------------------------------------------------------
// Skeleton

struct SkeletonPoint {
  double t = 0.0;
  Vec x;
  Velocity theta;
};

struct Skeleton {
  double delta = 0.0;
  std::vector<SkeletonPoint> points;

  /// Coordinate i of every point.
  Vec coordinate(std::size_t i) const {
    Vec out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(p.x[i]);
    return out;
  }
};

/// Samples the trajectory at t = j * delta, j = 0 .. floor(t_end / delta),
/// by flow reconstruction.
inline Skeleton skeleton(const EventChain& chain, double delta) {
  if (!(delta > 0.0)) throw error("skeleton spacing must be positive");
  Skeleton sk;
  sk.delta = delta;
  const auto n = static_cast<std::size_t>(std::floor(chain.t_end / delta)) + 1;
  sk.points.reserve(n);
  const auto& ev = chain.events;
  std::size_t k = 0;
  std::optional<LineFlow> flow;  // flow of segment k, built on first use
  for (std::size_t j = 0; j < n; ++j) {
    const double t = static_cast<double>(j) * delta;
    while (k + 1 < ev.size() && ev[k + 1].t <= t) {
      ++k;
      flow.reset();
    }
    const Event& e = ev[k];
    const double dt = t - e.t;
    SkeletonPoint p;
    p.t = t;
    p.theta = e.theta;
    if (dt == 0.0) {
      p.x = e.x;
    } else if (chain.spec.speed.is_constant()) {
      p.x = along(e.x, e.theta, dt * chain.spec.speed.scale);
    } else {
      if (!flow) flow.emplace(e.x, e.theta, chain.spec.speed);
      p.x = flow->position_at(dt);
    }
    sk.points.push_back(std::move(p));
  }
  return sk;
}

// ---------------------------------------------------------------------------
// Path integrals

using Observable = std::function<double(std::span<const double>, const Velocity&)>;

/// int g(Z_t) dt over one segment's arc interval [u0, u1], as int g / s du.
inline double segment_integral(const RateSpec& rs, const Vec& start, const Velocity& theta,
                               double u0, double u1, const Observable& g) {
  if (u1 <= u0) return 0.0;
  if (rs.speed.is_constant()) {
    auto f = [&](double v) { return g(along(start, theta, v), theta); };
    return quad::integrate(f, u0, u1, 1e-11).value / rs.speed.scale;
  }
  auto f = [&](double v) {
    const Vec y = along(start, theta, v);
    return g(y, theta) / rs.speed(y);
  };
  return quad::integrate(f, u0, u1, 1e-11).value;
}

/// int_{a}^{b} g(Z_t) dt along the chain.
inline double path_integral(const EventChain& chain, const Observable& g, double a, double b) {
  double total = 0.0;
  const auto& rs = chain.spec;
  for_each_segment(chain, [&](const Segment& seg) {
    const double s0 = std::max(a, seg.t0);
    const double s1 = std::min(b, seg.t0 + seg.duration);
    if (s1 <= s0) return;
    double u0 = 0.0, u1 = seg.arc;
    if (s0 > seg.t0 || s1 < seg.t0 + seg.duration) {
      LineFlow flow(*seg.start, *seg.theta, rs.speed);
      if (s0 > seg.t0) u0 = flow.arc_of_time(s0 - seg.t0);
      if (s1 < seg.t0 + seg.duration) u1 = flow.arc_of_time(s1 - seg.t0);
    }
    total += segment_integral(rs, *seg.start, *seg.theta, u0, u1, g);
  });
  return total;
}

/// (1/T) int_0^T g(Z_t) dt.
inline double time_average(const EventChain& chain, const Observable& g) {
  if (!(chain.t_end > 0.0)) throw error("time_average needs a chain with positive duration");
  return path_integral(chain, g, 0.0, chain.t_end) / chain.t_end;
}

}  // namespace suzz
