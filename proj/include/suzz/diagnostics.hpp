#pragma once

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "suzz/core.hpp"
#include "suzz/events.hpp"
#include "suzz/flow.hpp"
#include "suzz/sampler.hpp"

namespace suzz {

// ---------------------------------------------------------------------------
// Effective sample size

struct EssResult {
  double ess = 0.0;
  /// Integrated autocorrelation time n / ess.
  double tau = 0.0;
  /// Last lag that entered the sum.
  std::size_t max_lag = 0;
  /// ess exceeds the sample count (antithetic series).
  bool super_n = false;
  std::string method = "initial-monotone-sequence";
};

/// ESS from Geyer's initial positive sequence with the monotone correction.
/// Autocovariances use the biased (divide by n) estimator. The autocorrelation
/// time is floored at 1 / log10(n), so ess <= n log10(n).
inline EssResult ess_detail(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 100) throw error("ess needs at least 100 values, got " + std::to_string(n));
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / n;
  Vec c(series.size());
  for (std::size_t i = 0; i < n; ++i) c[i] = series[i] - mean;
  auto acov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += c[i] * c[i + lag];
    return s / static_cast<double>(n);
  };
  const double c0 = acov(0);
  if (!(c0 > 0.0) || c0 <= 1e-28 * (mean * mean)) {
    throw error("ess undefined for a constant series");
  }
  double sum = 0.0;  // sum of the pair sums
  double prev = kInf;
  std::size_t lag = 0;
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    const double r0 = k == 0 ? 1.0 : acov(2 * k) / c0;
    const double r1 = acov(2 * k + 1) / c0;
    double pair = r0 + r1;
    if (!(pair > 0.0)) break;
    pair = std::min(pair, prev);
    prev = pair;
    sum += pair;
    lag = 2 * k + 1;
  }
  EssResult r;
  const double floor_tau = 1.0 / std::log10(static_cast<double>(n));
  r.tau = std::max(-1.0 + 2.0 * sum, floor_tau);
  r.ess = static_cast<double>(n) / r.tau;
  r.max_lag = lag;
  r.super_n = r.ess > static_cast<double>(n);
  return r;
}

inline double ess(std::span<const double> series) { return ess_detail(series).ess; }

/// Elementwise map of a series.
inline Vec transform_series(std::span<const double> series, const std::function<double(double)>& f) {
  Vec out(series.size());
  std::transform(series.begin(), series.end(), out.begin(), f);
  return out;
}

/// sgn(x) log(1 + |x|) applied elementwise.
inline Vec sgnlog_series(std::span<const double> series) {
  return transform_series(series, [](double x) { return sgn(x) * std::log1p(std::abs(x)); });
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

/// P(K > lambda) for the Kolmogorov distribution.
inline double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Asymptotic p-value for statistic d at effective size n, with the
/// (sqrt(n) + 0.12 + 0.11 / sqrt(n)) finite-sample correction.
inline double ks_pvalue(double d, double n) {
  const double sn = std::sqrt(n);
  return kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double n = 0.0;  // size used for the p-value
};

/// One-sample statistic sup |F_n - F|.
inline double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf) {
  Vec s(sample.begin(), sample.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

inline KsResult ks_test(std::span<const double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw error("ks test on an empty sample");
  KsResult r;
  r.statistic = ks_statistic(sample, cdf);
  r.n = static_cast<double>(sample.size());
  r.p_value = ks_pvalue(r.statistic, r.n);
  return r;
}

inline KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw error("ks test on an empty sample");
  Vec x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = x.size(), m = y.size();
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(i / n - j / m));
  }
  KsResult r;
  r.statistic = d;
  r.n = n * m / (n + m);
  r.p_value = ks_pvalue(d, r.n);
  return r;
}

/// KS against cdf for an autocorrelated series. The p-value uses
/// n_eff = min(ESS(x), ESS(cdf(x))), capped at the sample count.
inline KsResult ks_test_dependent(std::span<const double> series,
                                  const std::function<double(double)>& cdf) {
  KsResult r;
  r.statistic = ks_statistic(series, cdf);
  const Vec u = transform_series(series, cdf);
  const double n = static_cast<double>(series.size());
  r.n = std::min({ess(series), ess(u), n});
  r.p_value = ks_pvalue(r.statistic, r.n);
  return r;
}

// ---------------------------------------------------------------------------
// Q-Q data

struct QQPair {
  double p = 0.0;
  double empirical = 0.0;
  double reference = 0.0;
};

/// Empirical quantiles (linear interpolation between order statistics) and
/// reference quantiles at p = j / (n_points + 1), j = 1..n_points.
inline std::vector<QQPair> qq_data(std::span<const double> series,
                                   const std::function<double(double)>& quantile,
                                   std::size_t n_points) {
  if (series.empty()) throw error("qq data on an empty series");
  Vec s(series.begin(), series.end());
  std::sort(s.begin(), s.end());
  std::vector<QQPair> out;
  out.reserve(n_points);
  for (std::size_t j = 1; j <= n_points; ++j) {
    const double p = static_cast<double>(j) / (n_points + 1);
    const double h = p * (s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    const double emp = s[lo] + (h - lo) * (s[hi] - s[lo]);
    out.push_back({p, emp, quantile(p)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hypercube occupation

/// Time fraction the trajectory spends in [-l, l]^d, for every l in `ls`.
/// Each segment's entry and exit arcs are solved exactly and converted to
/// time through the flow.
inline Vec cube_probabilities(const EventChain& chain, std::span<const double> ls) {
  if (!(chain.t_end > 0.0)) throw error("cube probability needs a chain with positive duration");
  for (double l : ls) {
    if (!(l > 0.0)) throw error("cube half-width must be positive");
  }
  Vec inside(ls.size(), 0.0);
  const auto& rs = chain.spec;
  for_each_segment(chain, [&](const Segment& seg) {
    const Vec& x = *seg.start;
    const Velocity& th = *seg.theta;
    std::optional<LineFlow> flow;
    for (std::size_t j = 0; j < ls.size(); ++j) {
      const double l = ls[j];
      // |x_i + theta_i u| <= l  <=>  u in [-l - theta_i x_i, l - theta_i x_i].
      double lo = 0.0, hi = seg.arc;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double c = th[i] * x[i];
        lo = std::max(lo, -l - c);
        hi = std::min(hi, l - c);
      }
      if (hi <= lo) continue;
      if (lo == 0.0 && hi == seg.arc) {
        inside[j] += seg.duration;
      } else if (rs.speed.is_constant()) {
        inside[j] += (hi - lo) / rs.speed.scale;
      } else {
        if (!flow) flow.emplace(x, th, rs.speed);
        const double t_hi = hi == seg.arc ? seg.duration : flow->time_of_arc(hi);
        inside[j] += t_hi - flow->time_of_arc(lo);
      }
    }
  });
  for (double& v : inside) v = std::clamp(v / chain.t_end, 0.0, 1.0);
  return inside;
}

inline double cube_probability(const EventChain& chain, double l) {
  return cube_probabilities(chain, std::span<const double>(&l, 1))[0];
}

/// Fraction of skeleton points inside [-l, l]^d.
inline double cube_probability_skeleton(const Skeleton& sk, double l) {
  if (sk.points.empty()) throw error("empty skeleton");
  std::size_t in = 0;
  for (const auto& p : sk.points) in += max_abs(p.x) <= l;
  return static_cast<double>(in) / sk.points.size();
}

// ---------------------------------------------------------------------------
// Event-time law and asymptotic variance

/// Integrated rate between consecutive events; i.i.d. Exp(1) when event
/// times are simulated correctly.
inline Vec integrated_rate_increments(const EventChain& chain) {
  Vec out;
  const auto& ev = chain.events;
  if (ev.size() < 2) return out;
  out.reserve(ev.size() - 1);
  for (std::size_t k = 0; k + 1 < ev.size(); ++k) {
    double arc = 0.0;
    for (std::size_t i = 0; i < ev[k].x.size(); ++i) {
      arc = std::max(arc, std::abs(ev[k + 1].x[i] - ev[k].x[i]));
    }
    const LineFlow flow(ev[k].x, ev[k].theta, chain.spec.speed);
    out.push_back(integrated_rate_arc(chain.spec, flow, arc));
  }
  return out;
}

struct BatchMeansResult {
  double gamma2 = 0.0;
  std::size_t batches = 0;
  double batch_length = 0.0;
  /// Two-sided chi-square interval for gamma2 at the requested level.
  double lower = 0.0;
  double upper = 0.0;
  Vec means;
};

/// Batch-means estimate of the asymptotic variance of the time average of g:
/// gamma2 = (T / B) * sample variance of the B batch averages.
inline BatchMeansResult batch_means(const EventChain& chain, const Observable& g,
                                    std::size_t batches, double level = 0.99) {
  if (batches < 2) throw error("batch means needs at least two batches");
  if (!(chain.t_end > 0.0)) throw error("batch means needs a chain with positive duration");
  BatchMeansResult r;
  r.batches = batches;
  r.batch_length = chain.t_end / batches;
  r.means.assign(batches, 0.0);
  const auto& rs = chain.spec;
  // One pass over segments, splitting each at batch boundaries.
  for_each_segment(chain, [&](const Segment& seg) {
    const double end = seg.t0 + seg.duration;
    std::optional<LineFlow> flow;
    auto arc_at = [&](double t) {
      if (t <= seg.t0) return 0.0;
      if (t >= end) return seg.arc;
      if (rs.speed.is_constant()) return (t - seg.t0) * rs.speed.scale;
      if (!flow) flow.emplace(*seg.start, *seg.theta, rs.speed);
      return flow->arc_of_time(t - seg.t0);
    };
    auto b = static_cast<std::size_t>(seg.t0 / r.batch_length);
    double t = seg.t0;
    while (t < end && b < batches) {
      const double stop = std::min(end, (b + 1) * r.batch_length);
      r.means[b] += segment_integral(rs, *seg.start, *seg.theta, arc_at(t), arc_at(stop), g);
      t = stop;
      ++b;
    }
  });
  for (double& m : r.means) m /= r.batch_length;
  const double mean = std::accumulate(r.means.begin(), r.means.end(), 0.0) / batches;
  double ss = 0.0;
  for (double m : r.means) ss += (m - mean) * (m - mean);
  const double var = ss / (batches - 1);
  r.gamma2 = r.batch_length * var;
  const boost::math::chi_squared chi(static_cast<double>(batches - 1));
  const double alpha = 1.0 - level;
  r.lower = (batches - 1) * r.gamma2 / boost::math::quantile(chi, 1.0 - alpha / 2);
  r.upper = (batches - 1) * r.gamma2 / boost::math::quantile(chi, alpha / 2);
  return r;
}

// ---------------------------------------------------------------------------
// Report

struct DiagnosticsReport {
  double ess = 0.0;
  std::string ess_method;
  bool super_n = false;
  std::size_t samples = 0;
  bool has_ks = false;
  KsResult ks;
  std::vector<QQPair> qq_pairs;
  std::vector<std::pair<double, double>> cube_probs;  // (l, estimate)
};

struct DiagnoseOptions {
  /// Map applied before ESS and KS (identity when empty).
  std::function<double(double)> transform;
  std::function<double(double)> cdf;
  std::function<double(double)> quantile;
  std::size_t qq_points = 99;
};

/// ESS, and KS plus Q-Q when a reference is available, of a skeleton series.
inline DiagnosticsReport diagnose_series(std::span<const double> raw, const DiagnoseOptions& opt) {
  DiagnosticsReport rep;
  const Vec series = opt.transform ? transform_series(raw, opt.transform) : Vec(raw.begin(), raw.end());
  const EssResult e = ess_detail(series);
  rep.ess = e.ess;
  rep.ess_method = e.method;
  rep.super_n = e.super_n;
  rep.samples = series.size();
  if (opt.cdf) {
    rep.has_ks = true;
    rep.ks = ks_test_dependent(raw, opt.cdf);
  }
  if (opt.quantile) rep.qq_pairs = qq_data(raw, opt.quantile, opt.qq_points);
  return rep;
}

}  // namespace suzz
