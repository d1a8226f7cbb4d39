#pragma once

// Adaptive Gauss-Kronrod on Boost.Math nodes, exp-sinh tails and TOMS 748
// roots behind one vocabulary.

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <algorithm>
#include <array>
#include <queue>
#include <utility>

#include "suzz/core.hpp"

namespace suzz::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;
};

inline constexpr double kDefaultTol = 1e-12;

/// One 15-point Kronrod panel on [a, b]. The error estimate is the raw
/// |K15 - G7|, floored at 50 eps * L1. The endpoints are evaluated too: when
/// an endpoint and its nearest node disagree about being zero, the support
/// edge of a positive part lies in the gap the nodes cannot see, and the
/// gap's possible mass is added to the error. Any such zero/nonzero change
/// between neighbouring points is kept as a bracket [edge_lo, edge_hi].
struct Panel {
  double a, b, value, error, l1;
  double edge_lo = 0.0, edge_hi = 0.0;
  bool has_edge = false;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel kronrod15(F& f, double a, double b) {
  using gk = boost::math::quadrature::gauss_kronrod<double, 15>;
  using g7 = boost::math::quadrature::gauss<double, 7>;
  const auto& x = gk::abscissa();  // x[0] = 0; even indices are Gauss nodes
  const auto& wk = gk::weights();
  const auto& wg = g7::weights();
  constexpr std::size_t n = 8;
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  // pts/vals in increasing position: a, c - h x[7], ..., c, ..., c + h x[7], b
  std::array<double, 2 * n + 1> pts{}, vals{};
  const double f0 = f(c);
  pts[n] = c;
  vals[n] = f0;
  double k = f0 * wk[0], g = f0 * wg[0], l1 = std::abs(f0) * wk[0];
  for (std::size_t i = 1; i < n; ++i) {
    const double fm = f(c - h * x[i]), fp = f(c + h * x[i]);
    pts[n - i] = c - h * x[i];
    vals[n - i] = fm;
    pts[n + i] = c + h * x[i];
    vals[n + i] = fp;
    k += (fm + fp) * wk[i];
    l1 += (std::abs(fm) + std::abs(fp)) * wk[i];
    if (i % 2 == 0) g += (fm + fp) * wg[i / 2];
  }
  pts[0] = a;
  vals[0] = f(a);
  pts[2 * n] = b;
  vals[2 * n] = f(b);
  const double ah = std::abs(h);
  l1 *= ah;
  Panel p{a, b, k * h, std::max(std::abs((k - g) * h), 50.0 * 2.2e-16 * l1), l1};
  const double gap = (1.0 - x.back()) * ah;
  // A zero/nonzero change within 1e-9 of the panel width from an endpoint
  // counts as resolved (the panel was cut there).
  const double probe = 1e-9 * h;
  std::array<bool, 2> resolved{false, false};
  for (int side = 0; side < 2; ++side) {
    const std::size_t j = side == 0 ? 0 : 2 * n - 1;
    const std::size_t e = side == 0 ? 0 : 2 * n;
    if ((vals[j] == 0.0) == (vals[j + 1] == 0.0)) continue;
    const double fp = f(pts[e] + (side == 0 ? probe : -probe));
    if ((fp == 0.0) != (vals[e] == 0.0)) {
      resolved[side] = true;
      continue;
    }
    p.error += gap * std::max(std::abs(vals[j]), std::abs(vals[j + 1]));
  }
  for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
    if ((j == 0 && resolved[0]) || (j == 2 * n - 1 && resolved[1])) continue;
    if ((vals[j] == 0.0) != (vals[j + 1] == 0.0)) {
      p.has_edge = true;
      p.edge_lo = pts[j];
      p.edge_hi = pts[j + 1];
      break;
    }
  }
  return p;
}

/// Where a panel is cut: at its support edge when it has one (so each side
/// is smooth), otherwise at the midpoint.
template <class F>
double split_point(F& f, const Panel& p) {
  const double mid = 0.5 * (p.a + p.b);
  if (!p.has_edge) return mid;
  double lo = std::min(p.edge_lo, p.edge_hi), hi = std::max(p.edge_lo, p.edge_hi);
  const bool lo_zero = f(lo) == 0.0;
  for (int it = 0; it < 80; ++it) {
    const double m = 0.5 * (lo + hi);
    if (!(m > lo && m < hi)) break;
    ((f(m) == 0.0) == lo_zero ? lo : hi) = m;
  }
  const double cut = 0.5 * (lo + hi);
  const double lo_end = std::min(p.a, p.b), hi_end = std::max(p.a, p.b);
  const double room = 1e-9 * (hi_end - lo_end);
  // An edge hugging an endpoint is already resolved; fall back to bisection.
  if (!(cut > lo_end + room && cut < hi_end - room)) return mid;
  return cut;
}

/// Globally adaptive Gauss-Kronrod 15: the interval with the largest error
/// estimate is bisected until the summed error is below
/// max(rel_tol * |I|, abs_tol, 100 eps * L1) or `max_intervals` is reached.
template <class F>
Result integrate(F&& f, double a, double b, double rel_tol = kDefaultTol,
                 unsigned max_intervals = 2000, double abs_tol = 0.0) {
  Result r;
  if (a == b) return r;
  auto rule = [&](double lo, double hi) { return kronrod15(f, lo, hi); };
  std::priority_queue<Panel> heap;
  heap.push(rule(a, b));
  double value = heap.top().value, error = heap.top().error, l1 = heap.top().l1;
  auto done = [&] {
    // Panels never report less than 50 eps * l1, so the floor here sits above that.
    const double goal = std::max({rel_tol * std::abs(value), abs_tol, 100.0 * 2.2e-16 * l1});
    return error <= goal;
  };
  while (!done() && heap.size() < max_intervals) {
    const Panel top = heap.top();
    const double mid = split_point(f, top);
    if (!(mid > std::min(top.a, top.b) && mid < std::max(top.a, top.b))) break;  // machine resolution
    heap.pop();
    const Panel lo = rule(top.a, mid), hi = rule(mid, top.b);
    value += lo.value + hi.value - top.value;
    error += lo.error + hi.error - top.error;
    l1 += lo.l1 + hi.l1 - top.l1;
    heap.push(lo);
    heap.push(hi);
  }
  // Re-sum to shed the drift of incremental updates.
  value = error = l1 = 0.0;
  while (!heap.empty()) {
    value += heap.top().value;
    error += heap.top().error;
    l1 += heap.top().l1;
    heap.pop();
  }
  r.value = value;
  r.error = error;
  r.l1 = l1;
  return r;
}

/// Integral over [a, +inf) through the substitution y = a + tan(w).
template <class F>
Result integrate_upper_tail(F&& f, double a, double rel_tol = kDefaultTol,
                            unsigned max_intervals = 2000) {
  auto g = [&](double w) {
    const double t = std::tan(w);
    const double c = std::cos(w);
    const double v = f(a + t);
    return v == 0.0 ? 0.0 : v / (c * c);
  };
  return integrate(g, 0.0, M_PI_2, rel_tol, max_intervals);
}

/// Integral over (-inf, b] through y = b - tan(w).
template <class F>
Result integrate_lower_tail(F&& f, double b, double rel_tol = kDefaultTol,
                            unsigned max_intervals = 2000) {
  return integrate_upper_tail([&](double v) { return f(2.0 * b - v); }, b,
                              rel_tol, max_intervals);
}

/// Integral over the real line, split at `split` so kinks there are nodes.
template <class F>
Result integrate_real_line(F&& f, double split = 0.0,
                           double rel_tol = kDefaultTol,
                           unsigned max_intervals = 2000) {
  const Result lo = integrate_lower_tail(f, split, rel_tol, max_intervals);
  const Result hi = integrate_upper_tail(f, split, rel_tol, max_intervals);
  return {lo.value + hi.value, lo.error + hi.error, lo.l1 + hi.l1};
}

/// Integral over [a, +inf) by exp-sinh; suited to slowly (algebraically)
/// decaying integrands where the tan substitution leaves an endpoint
/// singularity.
template <class F>
Result integrate_algebraic_tail(F&& f, double a, double rel_tol = 1e-13) {
  thread_local boost::math::quadrature::exp_sinh<double> rule;
  Result r;
  r.value = rule.integrate(f, a, kInf, rel_tol, &r.error, &r.l1);
  return r;
}

/// Integral over [a, +inf) by exp-sinh, as a Result with the rule's error
/// estimate. Handles exponential and algebraic (also logarithmically
/// modulated) tails without an endpoint singularity.
template <class F>
Result integrate_half_line(F&& f, double a, double rel_tol = 1e-12) {
  thread_local boost::math::quadrature::exp_sinh<double> rule(12);
  Result r;
  r.value = rule.integrate([&](double y) { return f(y); }, a, kInf, rel_tol, &r.error, &r.l1);
  if (std::isfinite(r.value) && r.error <= 100.0 * rel_tol * r.l1) return r;
  // fallback for integrands with jumps
  const Result g = integrate_upper_tail(f, a, rel_tol, 4000);
  return std::isfinite(g.value) && (!std::isfinite(r.value) || g.error < r.error) ? g : r;
}

/// Real-line integral as two exp-sinh halves split at `split`.
template <class F>
Result integrate_line_halves(F&& f, double split = 0.0, double rel_tol = 1e-12) {
  const Result hi = integrate_half_line(f, split, rel_tol);
  const Result lo = integrate_half_line([&](double v) { return f(2.0 * split - v); }, split, rel_tol);
  return {lo.value + hi.value, lo.error + hi.error, lo.l1 + hi.l1};
}

/// Root of a function with f(a) and f(b) of opposite signs.
template <class F>
double bracketed_root(F&& f, double a, double b, double fa, double fb,
                      int bits = 52, std::uintmax_t max_iter = 200) {
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  boost::math::tools::eps_tolerance<double> tol(bits);
  auto [lo, hi] =
      boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, max_iter);
  return 0.5 * (lo + hi);
}

}  // namespace suzz::quad
