#include <gtest/gtest.h>

#include <cmath>

#include "suzz/sampler.hpp"

using namespace suzz;

namespace {

double max_abs(const Vec& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST(Sampler, FirstEventInvertsQuadraticRate) {
  const RateSpec rs(make_std_normal_1d(), unit_speed());
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Rng rng(seed), copy(seed);
    const EventChain c = run_until_switches(rs, {0.0}, {1}, 1, rng);
    ASSERT_EQ(c.events.size(), 2u);
    EXPECT_NEAR(c.events[1].t, std::sqrt(2.0 * copy.exponential()), 1e-12);
    EXPECT_EQ(c.events[1].flip, 1);
    EXPECT_EQ(c.events[1].theta[0], -1);
  }
}

TEST(Sampler, NoEventEscapeIsReported) {
  const Target flat = make_custom(
      1, [](std::span<const double>) { return 0.0; },
      [](std::span<const double>, std::span<double> g) { g[0] = 0.0; });
  Rng rng(1);
  EXPECT_THROW(run_until_switches(RateSpec(flat, unit_speed()), {0.0}, {1}, 5, rng), no_event_escape);
}

TEST(Sampler, ChainStructure) {
  const RateSpec rs(make_cauchy_5d(), poly_radial(0.5));
  Rng rng(8);
  const EventChain c = run_until_switches(rs, Vec(5, 0.0), Velocity(5, 1), 2000, rng);
  ASSERT_EQ(c.switches(), 2000u);
  EXPECT_EQ(c.events[0].flip, 0);
  for (std::size_t k = 1; k < c.events.size(); ++k) {
    const Event& a = c.events[k - 1];
    const Event& b = c.events[k];
    EXPECT_GT(b.t, a.t);
    int diff = 0;
    for (std::size_t i = 0; i < 5; ++i) diff += a.theta[i] != b.theta[i];
    EXPECT_EQ(diff, 1);
    EXPECT_EQ(a.theta[b.flip - 1], -b.theta[b.flip - 1]);
    const Vec x = LineFlow(a.x, a.theta, rs.speed).position_at(b.t - a.t);
    for (std::size_t i = 0; i < 5; ++i) {
      EXPECT_NEAR(x[i], b.x[i], 1e-7 * std::max(1.0, std::abs(b.x[i])));
    }
  }
}

TEST(Sampler, CauchyHalfSpeedLongRun) {
  const RateSpec rs(make_student_t_1d(1), poly_radial(0.5));
  Rng rng(4);
  EventChain c;
  EXPECT_NO_THROW(c = run_until_switches(rs, {0.0}, {1}, 10000, rng));
  EXPECT_EQ(c.switches(), 10000u);
}

TEST(Sampler, ZeroHorizon) {
  const RateSpec rs(make_std_normal_1d(), unit_speed());
  Rng rng(1);
  const EventChain c = run_until_time(rs, {0.4}, {-1}, 0.0, rng);
  EXPECT_EQ(c.events.size(), 1u);
  EXPECT_EQ(c.t_end, 0.0);
  EXPECT_EQ(c.x_end[0], 0.4);
}

TEST(Sampler, UnitSpeedBound) {
  const RateSpec rs(make_cauchy_5d(), unit_speed());
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const double T = 50.0;
    const EventChain c = run_until_time(rs, Vec(5, 0.0), Velocity(5, 1), T, rng);
    for (const auto& e : c.events) EXPECT_LE(max_abs(e.x), e.t + 1e-12);
    EXPECT_LE(max_abs(c.x_end), T + 1e-12);
    EXPECT_DOUBLE_EQ(c.t_end, T);
  }
}

TEST(Sampler, Deterministic) {
  const RateSpec rs(make_cauchy_5d(), poly_radial(0.3));
  Rng a(99), b(99);
  const EventChain c1 = run_until_time(rs, Vec(5, 0.0), Velocity(5, 1), 30.0, a);
  const EventChain c2 = run_until_time(rs, Vec(5, 0.0), Velocity(5, 1), 30.0, b);
  ASSERT_EQ(c1.events.size(), c2.events.size());
  for (std::size_t k = 0; k < c1.events.size(); ++k) {
    EXPECT_EQ(c1.events[k].t, c2.events[k].t);
    EXPECT_EQ(c1.events[k].x, c2.events[k].x);
    EXPECT_EQ(c1.events[k].theta, c2.events[k].theta);
  }
}

TEST(Skeleton, UnitSpeedSegment) {
  EventChain c;
  c.spec = RateSpec(make_std_normal_1d(), unit_speed());
  c.events.push_back({0.0, {0.0}, {1}, 0});
  c.t_end = 1.0;
  c.x_end = {1.0};
  c.theta_end = {1};
  const Skeleton sk = skeleton(c, 0.1);
  ASSERT_EQ(sk.points.size(), 11u);
  for (std::size_t j = 0; j < sk.points.size(); ++j) {
    EXPECT_EQ(sk.points[j].t, j * 0.1);
    EXPECT_EQ(sk.points[j].x[0], j * 0.1);
  }
  EXPECT_EQ(skeleton(c, 2.5).points.size(), 1u);
  EXPECT_EQ(skeleton(c, 2.5).points[0].t, 0.0);
  EXPECT_THROW(skeleton(c, 0.0), error);
}

TEST(Skeleton, TangentSegment) {
  EventChain c;
  c.spec = RateSpec(make_student_t_1d(1), poly_radial(1.0));
  c.events.push_back({0.0, {0.0}, {1}, 0});
  c.t_end = 1.5;
  c.x_end = {std::tan(1.5)};
  c.theta_end = {1};
  const Skeleton sk = skeleton(c, 0.1);
  ASSERT_EQ(sk.points.size(), 16u);
  for (std::size_t j = 0; j < sk.points.size(); ++j) {
    const double expect = std::tan(sk.points[j].t);
    EXPECT_NEAR(sk.points[j].x[0], expect, 1e-12 * (1.0 + std::abs(expect)));
  }
}

TEST(Skeleton, PointsLieOnTrajectory) {
  const RateSpec rs(make_student_t_1d(1), poly_radial(0.5));
  Rng rng(12);
  const EventChain c = run_until_time(rs, {0.0}, {1}, 200.0, rng);
  const Skeleton sk = skeleton(c, 0.1);
  EXPECT_EQ(sk.points.size(), static_cast<std::size_t>(std::floor(200.0 / 0.1)) + 1);
  std::size_t k = 0;
  for (const auto& p : sk.points) {
    while (k + 1 < c.events.size() && c.events[k + 1].t <= p.t) ++k;
    const Event& e = c.events[k];
    const double expect = LineFlow(e.x, e.theta, rs.speed).position_at(p.t - e.t)[0];
    EXPECT_NEAR(p.x[0], expect, 1e-9 * (1.0 + std::abs(expect)));
    EXPECT_EQ(p.theta, e.theta);
  }
}

TEST(PathIntegral, ConstantAndTriangle) {
  EventChain c;
  c.spec = RateSpec(make_std_normal_1d(), unit_speed());
  c.events.push_back({0.0, {0.0}, {1}, 0});
  c.t_end = 3.0;
  c.x_end = {3.0};
  c.theta_end = {1};
  EXPECT_NEAR(time_average(c, [](std::span<const double> x, const Velocity&) { return x[0]; }), 1.5, 1e-13);

  const RateSpec rs(make_cauchy_5d(), poly_radial(0.5));
  Rng rng(6);
  const EventChain d = run_until_time(rs, Vec(5, 0.0), Velocity(5, 1), 20.0, rng);
  EXPECT_NEAR(time_average(d, [](std::span<const double>, const Velocity&) { return 2.5; }), 2.5, 1e-10);
}

TEST(PathIntegral, NormalMeanOverSeeds) {
  const RateSpec rs(make_std_normal_1d(), unit_speed());
  const int n = 20;
  Vec m;
  for (int s = 0; s < n; ++s) {
    Rng rng(chain_seed(2024, s));
    const EventChain c = run_until_time(rs, {rng.normal()}, {rng.sign()}, 500.0, rng);
    m.push_back(time_average(c, [](std::span<const double> x, const Velocity&) { return x[0]; }));
  }
  double mean = 0.0, var = 0.0;
  for (double v : m) mean += v / n;
  for (double v : m) var += (v - mean) * (v - mean) / (n - 1);
  EXPECT_LT(std::abs(mean), 3.0 * std::sqrt(var / n));
}
