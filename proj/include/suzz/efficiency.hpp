#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "suzz/core.hpp"
#include "suzz/quadrature.hpp"
#include "suzz/speed.hpp"
#include "suzz/targets.hpp"

namespace suzz {

/// g(x, theta) for one-dimensional efficiency calculations.
struct Observable1d {
  std::string id;
  std::function<double(double, int)> g;

  /// (g(x, +1) + g(x, -1)) / 2.
  double symmetrized(double x) const { return 0.5 * (g(x, 1) + g(x, -1)); }
};

inline Observable1d identity_observable() {
  return {"x", [](double x, int) { return x; }};
}

/// sgn(x) log(1 + |x|).
inline double sgnlog(double x) { return sgn(x) * std::log1p(std::abs(x)); }

inline Observable1d sgnlog_observable() {
  return {"sgnlog", [](double x, int) { return sgnlog(x); }};
}

inline Observable1d zero_observable() {
  return {"zero", [](double, int) { return 0.0; }};
}

inline Observable1d make_observable(const std::string& id) {
  if (id == "x") return identity_observable();
  if (id == "sgnlog") return sgnlog_observable();
  if (id == "zero") return zero_observable();
  throw config_error("observable: unknown id '" + id + "'");
}

struct EfficiencyDiagnostics {
  double mean_error = 0.0;
  double n0_error = 0.0;
  double variance_error = 0.0;
};

/// Inverse algorithmic efficiency of a one-dimensional (target, speed,
/// observable) triple.
///
/// With r = s e^{-U}, J = int |r'| dx * int |r'| k^2 / r^2 dx where
/// k(x) = int_x^inf (gbar(y) - mu(gbar)) e^{-U(y)} dy and
/// gbar = (g(., +1) + g(., -1)) / 2. No normalizing constant enters J.
///
/// When log Z is known, n0 and gamma2 are the normalized switch intensity
/// and asymptotic variance: n0 = n0_factor / (2Z), gamma2 = 2 variance_factor
/// / Z, so that J = Z^2 * n0 * gamma2. Without Z both use Z = 1.
struct EfficiencyReport {
  std::string target_id;
  std::string speed_id;
  std::string observable_id;
  double n0_factor = 0.0;
  double variance_factor = 0.0;
  double J = 0.0;
  double n0 = 0.0;
  double gamma2 = 0.0;
  bool normalized = false;
  double observable_mean = 0.0;
  bool divergent = false;
  std::string reason;
  EfficiencyDiagnostics diagnostics;
};

namespace detail {

inline void require_converged(const quad::Result& r, const std::string& what, double rel = 1e-6) {
  if (!std::isfinite(r.value) || !(r.error <= rel * std::max(r.l1, 1e-300) + 1e-300)) {
    std::ostringstream os;
    os << what << " did not converge (value " << r.value << ", error estimate " << r.error << ")";
    throw divergence_error(os.str());
  }
}

/// Integration length scale near x: the distance over which U changes by
/// order one, capped by max(1, |x|).
inline double local_scale(const Target& t, double x) {
  const double cap = std::max(1.0, std::abs(x));
  const double du = std::abs(t.dU1(x));
  if (!(du > 0.0)) return cap;
  return std::min(cap, 1.0 / du);
}

/// Integrand values at |x| beyond double-range squares (where 1 + x^2
/// overflows) are taken as zero when they are not finite.
inline double far_tail_guard(double x, double v) {
  if (std::isfinite(v) || std::abs(x) < 1e100) return v;
  return 0.0;
}

}  // namespace detail

/// Efficiency machinery for one target, speed and observable. Holds the
/// centering constant so k can be evaluated repeatedly.
class EfficiencyProblem {
 public:
  EfficiencyProblem(Target target, SpeedFunction speed, Observable1d obs)
      : target_(std::move(target)), speed_(std::move(speed)), obs_(std::move(obs)) {
    if (target_.dim != 1) throw error("efficiency calculations are one-dimensional");
    const auto mass = quad::integrate_line_halves(
        [this](double x) { return detail::far_tail_guard(x, std::exp(-target_.U1(x))); }, 0.0, 1e-12);
    detail::require_converged(mass, "normalizing integral");
    const auto first = quad::integrate_line_halves(
        [this](double x) {
          return detail::far_tail_guard(x, obs_.symmetrized(x) * std::exp(-target_.U1(x)));
        }, 0.0, 1e-12);
    try {
      detail::require_converged(first, "mean of observable '" + obs_.id + "'");
    } catch (const divergence_error&) {
      throw divergence_error("observable '" + obs_.id + "' has no finite mean under " + target_.id);
    }
    mean_ = first.value / mass.value;
    // Round-off level means of symmetric observables are exactly zero.
    if (std::abs(mean_) <= 1e-13 * (first.l1 / mass.value)) mean_ = 0.0;
    mean_error_ = first.error / mass.value;
  }

  double mean() const { return mean_; }

  /// e^{U(x)} k(x); bounded where k itself under- or overflows.
  double scaled_k(double x) const {
    const double ux = target_.U1(x);
    const double L = detail::local_scale(target_, x);
    auto h = [&](double y) {
      const double w = obs_.symmetrized(y) - mean_;
      if (w == 0.0) return 0.0;
      return detail::far_tail_guard(y, w * std::exp(ux - target_.U1(y)));
    };
    quad::Result r;
    if (x >= 0.0) {
      r = quad::integrate_half_line([&](double v) { return L * h(x + L * v); }, 0.0, 1e-12);
    } else {
      r = quad::integrate_half_line([&](double v) { return L * h(x - L * v); }, 0.0, 1e-12);
      r.value = -r.value;
    }
    detail::require_converged(r, "tail integral k(x) for observable '" + obs_.id + "'");
    return r.value;
  }

  double k(double x) const { return std::exp(-target_.U1(x)) * scaled_k(x); }

  double A(double x) const { return speed_.at1(x) * target_.dU1(x) - speed_.d1(x); }

  /// |r'(x)| = e^{-U} |A|.
  double abs_r_prime(double x) const {
    const double e = std::exp(-target_.U1(x));
    return e == 0.0 ? 0.0 : e * std::abs(A(x));
  }

  /// |r'| k^2 / r^2 = |A| e^{-U} (e^{U} k)^2 / s^2.
  double variance_integrand(double x) const {
    const double a = std::abs(A(x));
    if (a == 0.0) return 0.0;
    const double e = std::exp(-target_.U1(x));
    if (e == 0.0) return 0.0;
    const double kt = scaled_k(x);
    const double s = speed_.at1(x);
    return a * e * (kt / s) * (kt / s);
  }

  /// Divergence probe: x * h(x) summed over +-x must decay along 10^4, 10^6,
  /// 10^8 for an integrand h with an integrable tail.
  bool variance_tail_diverges() const {
    double prev = -1.0;
    bool growing = true;
    for (double X : {1e4, 1e6, 1e8}) {
      const double q = X * (variance_integrand(X) + variance_integrand(-X));
      if (!std::isfinite(q)) return true;
      if (prev >= 0.0 && q < prev) growing = false;
      prev = q;
    }
    return growing && prev > 0.0;
  }

  EfficiencyReport evaluate() const {
    EfficiencyReport rep;
    rep.target_id = target_.id;
    rep.speed_id = speed_.id;
    rep.observable_id = obs_.id;
    rep.observable_mean = mean_;
    rep.diagnostics.mean_error = mean_error_;

    const RateSpec rs(target_, speed_);
    const AuditReport audit = audit_assumptions(rs);
    bool growth = true;
    for (const auto& ray : audit.rays) growth = growth && ray.growth_ok;
    if (!growth) {
      throw error("speed growth audit failed for " + target_.id + " with " + speed_.id +
                  ": s e^{-U} does not vanish in the tails");
    }

    const auto n0 = quad::integrate_line_halves([this](double x) { return detail::far_tail_guard(x, abs_r_prime(x)); }, 0.0,
                                              1e-12);
    detail::require_converged(n0, "switch-intensity integral");
    rep.n0_factor = n0.value;
    rep.diagnostics.n0_error = n0.error;

    if (variance_tail_diverges()) {
      rep.divergent = true;
      rep.reason = "asymptotic-variance integral diverges (tail does not decay faster than 1/x)";
      rep.variance_factor = kInf;
      rep.J = kInf;
      rep.gamma2 = kInf;
      fill_normalized(rep);
      return rep;
    }
    quad::Result var;
    try {
      var = quad::integrate_line_halves([this](double x) {
        return detail::far_tail_guard(x, variance_integrand(x));
      }, 0.0,
                                      1e-10);
      detail::require_converged(var, "asymptotic-variance integral");
    } catch (const divergence_error& e) {
      rep.divergent = true;
      rep.reason = e.what();
      rep.variance_factor = kInf;
      rep.J = kInf;
      rep.gamma2 = kInf;
      fill_normalized(rep);
      return rep;
    }
    rep.variance_factor = var.value;
    rep.diagnostics.variance_error = var.error;
    rep.J = rep.n0_factor * rep.variance_factor;
    fill_normalized(rep);
    return rep;
  }

 private:
  void fill_normalized(EfficiencyReport& rep) const {
    const double z = target_.log_norm_const ? std::exp(*target_.log_norm_const) : 1.0;
    rep.normalized = target_.log_norm_const.has_value();
    rep.n0 = rep.n0_factor / (2.0 * z);
    rep.gamma2 = 2.0 * rep.variance_factor / z;
  }

  Target target_;
  SpeedFunction speed_;
  Observable1d obs_;
  double mean_ = 0.0;
  double mean_error_ = 0.0;
};

/// k(x) = int_x^inf (gbar(y) - mu(gbar)) e^{-U(y)} dy.
inline double k_of(const Target& target, const Observable1d& g, double x) {
  return EfficiencyProblem(target, unit_speed(), g).k(x);
}

inline EfficiencyReport inverse_efficiency(const Target& target, const SpeedFunction& speed,
                                           const Observable1d& g) {
  return EfficiencyProblem(target, speed, g).evaluate();
}

struct EfficiencyCell {
  std::string algorithm;
  std::string target;
  EfficiencyReport report;
  bool failed = false;
  std::string reason;

  double value() const { return failed || report.divergent ? kInf : report.J; }
};

struct EfficiencyTable {
  std::vector<std::string> algorithms;  // row labels
  std::vector<std::string> targets;     // column labels
  std::vector<EfficiencyCell> cells;    // row-major

  const EfficiencyCell& at(std::size_t row, std::size_t col) const {
    return cells.at(row * targets.size() + col);
  }
};

/// Display name: "Zig-Zag" for unit speed, "SUZZ(eps)" for poly speeds.
inline std::string algorithm_label(const SpeedFunction& s) {
  if (s.family == SpeedFamily::constant) return "Zig-Zag";
  if (s.family == SpeedFamily::poly_radial) {
    std::ostringstream os;
    os << "SUZZ(" << s.epsilon << ")";
    return os.str();
  }
  return s.id;
}

/// Observable used for a target column: sgn log on the Cauchy, x elsewhere.
inline Observable1d default_observable_for(const Target& t) {
  if (t.id == "student:1") return sgnlog_observable();
  return identity_observable();
}

/// Evaluates every (speed, target) pair; cells fail independently.
/// `observable_for` picks the observable per target.
inline EfficiencyTable efficiency_table(
    const std::vector<SpeedFunction>& speeds, const std::vector<Target>& targets,
    const std::function<Observable1d(const Target&)>& observable_for = default_observable_for) {
  EfficiencyTable table;
  for (const auto& s : speeds) table.algorithms.push_back(algorithm_label(s));
  for (const auto& t : targets) table.targets.push_back(t.id);
  table.cells.resize(speeds.size() * targets.size());
  for (std::size_t r = 0; r < speeds.size(); ++r) {
    for (std::size_t c = 0; c < targets.size(); ++c) {
      auto& cell = table.cells[r * targets.size() + c];
      cell.algorithm = table.algorithms[r];
      cell.target = targets[c].id;
      try {
        cell.report = inverse_efficiency(targets[c], speeds[r], observable_for(targets[c]));
        if (cell.report.divergent) cell.reason = cell.report.reason;
      } catch (const error& e) {
        cell.failed = true;
        cell.reason = e.what();
      }
    }
  }
  return table;
}

/// The benchmark grid: Zig-Zag and SUZZ(0, 0.2, 0.5, 0.9) against normal,
/// symmetric exponential and Student t with 1, 2, 10, 100 degrees of freedom.
inline EfficiencyTable benchmark_efficiency_table() {
  const std::vector<SpeedFunction> speeds = {unit_speed(), poly_radial(0.0), poly_radial(0.2),
                                             poly_radial(0.5), poly_radial(0.9)};
  const std::vector<Target> targets = {make_std_normal_1d(),  make_symmetric_exponential_1d(),
                                       make_student_t_1d(1),  make_student_t_1d(2),
                                       make_student_t_1d(10), make_student_t_1d(100)};
  return efficiency_table(speeds, targets);
}

}  // namespace suzz
