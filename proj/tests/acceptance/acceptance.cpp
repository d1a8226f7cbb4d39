// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when all pass).

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "suzz/suzz.hpp"

using namespace suzz;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

class Notes {
 public:
  void check(bool ok, const std::string& line) {
    pass_ = pass_ && ok;
    if (!os_.str().empty()) os_ << "; ";
    os_ << (ok ? "" : "[miss] ") << line;
  }
  Outcome done() const { return {pass_, os_.str()}; }

 private:
  bool pass_ = true;
  std::ostringstream os_;
};

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

bool within_rel(double v, double target, double rel) { return std::abs(v - target) <= rel * std::abs(target); }

// 1 ----------------------------------------------------------------------

Outcome table_cells() {
  Notes n;
  const auto x = identity_observable();
  const double zn = inverse_efficiency(make_std_normal_1d(), unit_speed(), x).J;
  n.check(within_rel(zn, 4.0, 1e-6), "ZZ normal J=" + fmt(zn, 10) + " (4, 1e-6)");
  const double ze = inverse_efficiency(make_symmetric_exponential_1d(), unit_speed(), x).J;
  n.check(within_rel(ze, 20.0, 1e-6), "ZZ exp J=" + fmt(ze, 10) + " (20, 1e-6)");
  const double sn = inverse_efficiency(make_std_normal_1d(), poly_radial(0.5), x).J;
  n.check(within_rel(sn, 0.8097, 0.02), "SUZZ(0.5) normal J=" + fmt(sn) + " (0.8097 +-2%)");
  const double sc = inverse_efficiency(make_student_t_1d(1), poly_radial(0.9), sgnlog_observable()).J;
  n.check(within_rel(sc, 0.7474, 0.05), "SUZZ(0.9) t(1) J=" + fmt(sc) + " (0.7474 +-5%)");
  const double zt = inverse_efficiency(make_student_t_1d(10), unit_speed(), x).J;
  n.check(within_rel(zt, 31.04, 0.02), "ZZ t(10) J=" + fmt(zt) + " (31.04 +-2%)");
  const auto zc = inverse_efficiency(make_student_t_1d(1), unit_speed(), sgnlog_observable());
  n.check(zc.divergent && std::isinf(zc.J), std::string("ZZ t(1) ") + (zc.divergent ? "divergent" : fmt(zc.J)));
  return n.done();
}

// 2 ----------------------------------------------------------------------

Outcome convention_oracle() {
  Notes n;
  const auto rep = inverse_efficiency(make_std_normal_1d(), unit_speed(), identity_observable());
  const double g_quad = rep.gamma2;
  const double g_literal = 4.0 * g_quad;
  const RateSpec rs(make_std_normal_1d(), unit_speed());
  Rng rng(20240101);
  const double x0 = rng.normal();
  const int th = rng.sign();
  const EventChain c = run_until_time(rs, {x0}, {th}, 1e5, rng);
  const auto bm = batch_means(c, [](std::span<const double> x, const Velocity&) { return x[0]; }, 100);
  const double ratio = bm.gamma2 / g_quad;
  n.check(ratio >= 0.5 && ratio <= 2.0,
          "batch-means gamma2=" + fmt(bm.gamma2) + " vs quadrature " + fmt(g_quad) + " (ratio " + fmt(ratio, 4) + ")");
  n.check(bm.lower <= g_quad && g_quad <= bm.upper,
          "99% interval [" + fmt(bm.lower, 4) + ", " + fmt(bm.upper, 4) + "] contains calibrated value");
  n.check(g_literal > bm.upper, "literal-convention gamma2=" + fmt(g_literal, 4) + " excluded");
  return n.done();
}

// 3 ----------------------------------------------------------------------

Outcome oracle_equivalence() {
  Notes n;
  const RateSpec rs(make_student_t_1d(1), poly_radial(0.5));
  const auto r = equivalence_check(rs, 0.0, 1, 1000, 7);
  n.check(r.n_events == 1000, std::to_string(r.n_events) + " events");
  n.check(r.max_time_discrepancy < 1e-6, "time discrepancy " + fmt(r.max_time_discrepancy, 3));
  n.check(r.max_position_discrepancy < 1e-6, "position discrepancy " + fmt(r.max_position_discrepancy, 3));
  return n.done();
}

// 4 ----------------------------------------------------------------------

Outcome event_time_law() {
  Notes n;
  const auto exp_cdf = [](double t) { return t <= 0 ? 0.0 : -std::expm1(-t); };
  const std::vector<std::pair<std::string, RateSpec>> cases = {
      {"normal1d/unit", RateSpec(make_std_normal_1d(), unit_speed())},
      {"student:1/poly:0.5", RateSpec(make_student_t_1d(1), poly_radial(0.5))}};
  std::uint64_t seed = 41;
  for (const auto& [name, rs] : cases) {
    Rng rng(seed++);
    const EventChain c = run_until_switches(rs, {0.0}, {1}, 10000, rng);
    const auto ks = ks_test(integrated_rate_increments(c), exp_cdf);
    n.check(ks.p_value > 0.01, name + " D=" + fmt(ks.statistic, 4) + " p=" + fmt(ks.p_value, 3));
  }
  return n.done();
}

// 5 ----------------------------------------------------------------------

Outcome stationarity() {
  Notes n;
  const Target t = make_std_normal_1d();
  std::uint64_t seed = 51;
  for (const auto& speed : {unit_speed(), poly_radial(0.5)}) {
    const RateSpec rs(t, speed);
    Rng rng(seed++);
    const double x0 = t.quantile_1d(rng.uniform_pos());
    const int th = rng.sign();
    const EventChain c = run_until_switches(rs, {x0}, {th}, 100000, rng);
    const Vec xs = skeleton(c, 0.1).coordinate(0);
    const auto ks = ks_test_dependent(xs, t.cdf_1d);
    n.check(ks.p_value > 0.01, speed.id + " D=" + fmt(ks.statistic, 4) + " n_eff=" + fmt(ks.n, 5) +
                                   " p=" + fmt(ks.p_value, 3));
  }
  return n.done();
}

// 6 ----------------------------------------------------------------------

double median(Vec v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

Outcome ess_ordering() {
  Notes n;
  const std::vector<SpeedFunction> speeds = {unit_speed(), poly_radial(0.0), poly_radial(0.5)};
  const std::size_t seeds = 11;
  std::vector<Vec> ess_by(speeds.size(), Vec(seeds));
  experiment::parallel_for(speeds.size() * seeds, experiment::default_threads(), [&](std::size_t i) {
    const std::size_t a = i / seeds, k = i % seeds;
    const RateSpec rs(make_student_t_1d(1), speeds[a]);
    Rng rng(chain_seed(6060, k));
    const EventChain c = run_until_switches(rs, {0.0}, {1}, 10000, rng);
    ess_by[a][k] = ess(sgnlog_series(skeleton(c, 0.1).coordinate(0)));
  }, "chain");
  const double zz = median(ess_by[0]), s0 = median(ess_by[1]), s5 = median(ess_by[2]);
  n.check(s5 > s0 && s0 > zz, "median ESS ZZ=" + fmt(zz, 5) + " SUZZ(0)=" + fmt(s0, 5) + " SUZZ(0.5)=" + fmt(s5, 5));
  n.check(s5 / zz > 3.0, "ratio SUZZ(0.5)/ZZ=" + fmt(s5 / zz, 4) + " (>3)");
  return n.done();
}

// 7 ----------------------------------------------------------------------

Outcome tail_probabilities() {
  Notes n;
  const RateSpec rs(make_cauchy_5d(), poly_radial(0.0));
  Rng rng(1);
  const EventChain c = run_until_switches(rs, Vec(5, 0.0), Velocity(5, 1), 100000, rng);
  const Vec ls{2.2577, 12.4788};
  const Vec p = cube_probabilities(c, ls);
  n.check(std::abs(p[0] - 0.5) <= 0.03, "l=2.2577: " + fmt(p[0], 4) + " (0.5+-0.03)");
  n.check(std::abs(p[1] - 0.9) <= 0.02, "l=12.4788: " + fmt(p[1], 4) + " (0.9+-0.02)");
  return n.done();
}

// 8 ----------------------------------------------------------------------

double explosion_oracle(const Vec& x, const Velocity& th, const SpeedFunction& s) {
  boost::math::quadrature::exp_sinh<double> rule;
  return rule.integrate([&](double u) { return 1.0 / s(along(x, th, u)); }, 0.0, kInf, 1e-13);
}

Outcome flow_properties() {
  Notes n;
  Rng rng(88);
  const std::vector<double> eps = {-0.5, 0.0, 0.3, 0.5, 1.0, 1.0, 1.5, 2.0};
  const std::vector<std::size_t> dims = {1, 1, 2, 5};
  std::size_t configs = 0, explosive = 0, failures = 0;
  double worst_ode = 0.0, worst_semi = 0.0, worst_expl = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t d = dims[k % dims.size()];
    const SpeedFunction s = k % 10 == 9 ? constant_speed(0.5 + rng.uniform()) : poly_radial(eps[static_cast<std::size_t>(rng.uniform() * eps.size())]);
    Vec x(d);
    Velocity th(d);
    for (auto& v : x) v = 3.0 * rng.normal();
    for (auto& v : th) v = rng.sign();
    const LineFlow f(x, th, s);
    const double tstar = f.explosion_time();
    ++configs;
    if (std::isfinite(tstar)) {
      ++explosive;
      const double expect = explosion_oracle(x, th, s);
      const double rel = std::abs(tstar - expect) / expect;
      worst_expl = std::max(worst_expl, rel);
      if (!(rel <= 1e-7)) ++failures;
    }
    const double t = std::isfinite(tstar) ? 0.4 * tstar * rng.uniform() : 2.0 * rng.uniform();
    const double t2 = std::isfinite(tstar) ? 0.4 * tstar * rng.uniform() : 2.0 * rng.uniform();
    const Vec p = f.position_at(t);
    const double h = 1e-6 * (1.0 + t);
    const Vec up = f.position_at(t + h), dn = f.position_at(t - h);
    const double sp = s(p);
    const LineFlow g(p, th, s);
    const Vec q = g.position_at(t2), r = f.position_at(t + t2);
    for (std::size_t i = 0; i < d; ++i) {
      const double deriv = (up[i] - dn[i]) / (2.0 * h);
      const double ode = std::abs(deriv - th[i] * sp) / sp;
      const double semi = std::abs(q[i] - r[i]) / (1.0 + std::abs(r[i]));
      worst_ode = std::max(worst_ode, ode);
      worst_semi = std::max(worst_semi, semi);
      if (!(ode <= 1e-5) || !(semi <= 1e-8)) ++failures;
    }
  }
  n.check(failures == 0, std::to_string(configs) + " configs (" + std::to_string(explosive) +
                             " explosive), failures " + std::to_string(failures));
  n.check(worst_ode <= 1e-5, "max ODE residual " + fmt(worst_ode, 3));
  n.check(worst_semi <= 1e-8, "max semigroup error " + fmt(worst_semi, 3));
  n.check(worst_expl <= 1e-7, "max explosion-time error " + fmt(worst_expl, 3));
  return n.done();
}

// 9 ----------------------------------------------------------------------

Outcome unit_speed_bound() {
  Notes n;
  Rng draw(99);
  const std::vector<Target> targets = {make_std_normal_1d(), make_symmetric_exponential_1d(),
                                       make_student_t_1d(1), make_cauchy_5d()};
  std::size_t violations = 0, events = 0;
  for (int k = 0; k < 100; ++k) {
    const Target& t = targets[k % targets.size()];
    const RateSpec rs(t, unit_speed());
    const double T = 1.0 + 200.0 * draw.uniform();
    Rng rng(chain_seed(909, k));
    const EventChain c = run_until_time(rs, Vec(t.dim, 0.0), Velocity(t.dim, 1), T, rng);
    double sup = 0.0;
    for (const auto& e : c.events) {
      for (double v : e.x) sup = std::max(sup, std::abs(v));
    }
    for (double v : c.x_end) sup = std::max(sup, std::abs(v));
    events += c.events.size();
    if (!(sup <= c.t_end)) ++violations;
  }
  n.check(violations == 0, "100 runs, " + std::to_string(events) + " events, violations " + std::to_string(violations));
  return n.done();
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "efficiency table cells", 30, table_cells},
      {2, "batch-means convention oracle", 120, convention_oracle},
      {3, "1-d transform equivalence", 10, oracle_equivalence},
      {4, "event-time law", 30, event_time_law},
      {5, "stationarity", 60, stationarity},
      {6, "Cauchy ESS ordering", 300, ess_ordering},
      {7, "5-d Cauchy cube probabilities", 300, tail_probabilities},
      {8, "flow properties", 30, flow_properties},
      {9, "unit-speed bound", 60, unit_speed_bound},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_seconds;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("%s C%d %s: %s [%.1f s of %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                o.detail.c_str(), secs, c.budget_seconds, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
