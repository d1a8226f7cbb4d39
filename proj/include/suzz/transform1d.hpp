#pragma once

#include <algorithm>
#include <cmath>
#include <memory>

#include "suzz/core.hpp"
#include "suzz/flow.hpp"
#include "suzz/sampler.hpp"
#include "suzz/speed.hpp"
#include "suzz/targets.hpp"

namespace suzz {

/// One-dimensional space transform f(x) = int_0^x du / s(u).
///
/// f is the signed travel time from the origin, so it reuses the flow
/// machinery: f(x) = time_of_arc(x) along (0, +1) for x >= 0 and minus the
/// same along (0, -1) for x < 0. Under f a SUZZ path becomes a unit-speed
/// Zig-Zag path on (-M_minus, M_plus) with potential V = U o f^-1 - log s o f^-1.
class SpaceTransform {
 public:
  SpaceTransform(SpeedFunction speed, Target target)
      : speed_(std::move(speed)), target_(std::move(target)) {
    if (target_.dim != 1) throw error("space transform needs a one-dimensional target");
    up_ = std::make_shared<LineFlow>(Vec{0.0}, Velocity{1}, speed_);
    down_ = std::make_shared<LineFlow>(Vec{0.0}, Velocity{-1}, speed_);
    m_plus_ = up_->explosion_time();
    m_minus_ = down_->explosion_time();
  }

  double m_plus() const { return m_plus_; }
  double m_minus() const { return m_minus_; }
  const SpeedFunction& speed() const { return speed_; }
  const Target& target() const { return target_; }

  double f(double x) const {
    if (x >= 0.0) return up_->time_of_arc(x);
    return -down_->time_of_arc(-x);
  }

  double f_inv(double y) const {
    check(y);
    if (y >= 0.0) return up_->arc_of_time(y);
    return -down_->arc_of_time(-y);
  }

  /// V(y) = U(f^-1(y)) - log s(f^-1(y)).
  double V(double y) const {
    const double x = f_inv(y);
    return target_.U1(x) - std::log(speed_.at1(x));
  }

  /// V'(y) = s(x) U'(x) - s'(x) at x = f^-1(y), the chain rule through f.
  double V_prime(double y) const { return A_at(f_inv(y)); }

  double A_at(double x) const { return speed_.at1(x) * target_.dU1(x) - speed_.d1(x); }

  /// Unit-speed target on (-M_minus, M_plus) with potential V.
  Target transformed_target() const {
    auto self = std::make_shared<SpaceTransform>(*this);
    Target t;
    t.id = "transformed(" + target_.id + "," + speed_.id + ")";
    t.dim = 1;
    t.potential = [self](std::span<const double> y) { return self->V(y[0]); };
    t.gradient = [self](std::span<const double> y, std::span<double> g) {
      g[0] = self->V_prime(y[0]);
    };
    t.domain_lower = {-m_minus_};
    t.domain_upper = {m_plus_};
    return t;
  }

 private:
  void check(double y) const {
    const double hi = std::isfinite(m_plus_) ? m_plus_ - 1e-12 * std::max(1.0, m_plus_) : kInf;
    const double lo = std::isfinite(m_minus_) ? -m_minus_ + 1e-12 * std::max(1.0, m_minus_) : -kInf;
    if (!(y < hi) || !(y > lo)) {
      throw explosion_error("transformed coordinate " + std::to_string(y) +
                            " outside the open interval (-M_minus, M_plus)");
    }
  }

  SpeedFunction speed_;
  Target target_;
  std::shared_ptr<LineFlow> up_, down_;
  double m_plus_ = kInf, m_minus_ = kInf;
};

inline SpaceTransform make_transform(const SpeedFunction& speed, const Target& target) {
  return SpaceTransform(speed, target);
}

inline double transformed_potential_grad(const SpaceTransform& tr, double y) {
  return tr.V_prime(y);
}

struct EquivalenceReport {
  std::size_t n_events = 0;
  double max_time_discrepancy = 0.0;      // relative
  double max_position_discrepancy = 0.0;  // relative
  double min_boundary_distance = kInf;    // in transformed coordinates
  double m_plus = kInf;
  double m_minus = kInf;
  std::uint64_t seed = 0;
};

/// Mixed relative discrepancy |a - b| / max(1, |a|, |b|).
inline double relative_discrepancy(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

/// Runs SUZZ directly and a unit-speed Zig-Zag on the transformed potential
/// with the same random stream, then compares event times and positions
/// after mapping the Zig-Zag path back through f^-1.
inline EquivalenceReport equivalence_check(const RateSpec& rs, double x0, int theta0,
                                           std::size_t n_events, std::uint64_t seed,
                                           const SamplerOptions& opts = {}) {
  if (rs.dim() != 1) throw error("equivalence check is one-dimensional");
  const SpaceTransform tr(rs.speed, rs.target);
  Vec gamma_y;  // refresh constants do not survive the time change unless zero
  for (std::size_t i = 0; i < rs.refresh.size(); ++i) {
    if (rs.refresh[i] != 0.0) throw error("equivalence check needs canonical rates (gamma = 0)");
  }
  const RateSpec zz(tr.transformed_target(), unit_speed(), gamma_y);

  Rng rng_a(seed), rng_b(seed);
  const EventChain direct = run_until_switches(rs, {x0}, {theta0}, n_events, rng_a, opts);
  const EventChain mapped = run_until_switches(zz, {tr.f(x0)}, {theta0}, n_events, rng_b, opts);

  EquivalenceReport rep;
  rep.n_events = direct.switches();
  rep.m_plus = tr.m_plus();
  rep.m_minus = tr.m_minus();
  rep.seed = seed;
  for (std::size_t k = 0; k < direct.events.size(); ++k) {
    const auto& a = direct.events[k];
    const auto& b = mapped.events[k];
    rep.max_time_discrepancy = std::max(rep.max_time_discrepancy, relative_discrepancy(a.t, b.t));
    const double xb = tr.f_inv(b.x[0]);
    rep.max_position_discrepancy =
        std::max(rep.max_position_discrepancy, relative_discrepancy(a.x[0], xb));
    rep.min_boundary_distance =
        std::min({rep.min_boundary_distance, tr.m_plus() - b.x[0], b.x[0] + tr.m_minus()});
  }
  return rep;
}

}  // namespace suzz
