#include <gtest/gtest.h>

#include <cmath>

#include "suzz/efficiency.hpp"

using namespace suzz;

namespace {

// s with s e^{-U} = e^{-n^2/2} on [-n, n] for the standard normal, 1 outside.
SpeedFunction flattened(double n) {
  return custom_speed(
      [n](std::span<const double> x) {
        return std::abs(x[0]) < n ? std::exp(0.5 * (x[0] * x[0] - n * n)) : 1.0;
      },
      [n](std::span<const double> x, std::span<double> g) {
        g[0] = std::abs(x[0]) < n ? x[0] * std::exp(0.5 * (x[0] * x[0] - n * n)) : 0.0;
      });
}

SpeedFunction opaque_scaled(const SpeedFunction& s, double c) {
  return custom_speed([s, c](std::span<const double> x) { return c * s(x); },
                      [s, c](std::span<const double> x, std::span<double> g) {
                        s.gradient(x, g);
                        for (auto& v : g) v *= c;
                      });
}

}  // namespace

TEST(Efficiency, KClosedForms) {
  const Target n = make_std_normal_1d();
  const Target e = make_symmetric_exponential_1d();
  for (double x = -4.0; x <= 4.0; x += 0.25) {
    EXPECT_NEAR(k_of(n, identity_observable(), x), std::exp(-0.5 * x * x), 1e-10);
    EXPECT_EQ(k_of(n, zero_observable(), x), 0.0);
  }
  for (double x = 0.0; x <= 20.0; x += 0.5) {
    EXPECT_NEAR(k_of(e, identity_observable(), x), (x + 1.0) * std::exp(-x), 1e-10);
  }
}

TEST(Efficiency, AnalyticTableCells) {
  const auto zn = inverse_efficiency(make_std_normal_1d(), unit_speed(), identity_observable());
  EXPECT_NEAR(zn.J, 4.0, 4e-8);
  EXPECT_NEAR(zn.n0_factor, 2.0, 1e-10);
  const auto ze = inverse_efficiency(make_symmetric_exponential_1d(), unit_speed(), identity_observable());
  EXPECT_NEAR(ze.J, 20.0, 2e-7);
}

TEST(Efficiency, PublishedSpeedCells) {
  const auto a = inverse_efficiency(make_std_normal_1d(), poly_radial(0.5), identity_observable());
  EXPECT_NEAR(a.J, 0.8097, 0.05 * 0.8097);
  const auto b = inverse_efficiency(make_student_t_1d(1), poly_radial(0.9), sgnlog_observable());
  EXPECT_NEAR(b.J, 0.7474, 0.05 * 0.7474);
}

TEST(Efficiency, ZigZagOnCauchyDiverges) {
  const auto r = inverse_efficiency(make_student_t_1d(1), unit_speed(), sgnlog_observable());
  EXPECT_TRUE(r.divergent);
  EXPECT_TRUE(std::isinf(r.J));
  EXPECT_FALSE(r.reason.empty());
}

TEST(Efficiency, ScaleInvariance) {
  for (const auto& base : {unit_speed(), poly_radial(0.5)}) {
    const double j = inverse_efficiency(make_std_normal_1d(), base, identity_observable()).J;
    for (double c : {0.1, 7.0, 1000.0}) {
      const double jc = inverse_efficiency(make_std_normal_1d(), scaled(base, c), identity_observable()).J;
      EXPECT_NEAR(jc, j, 1e-9 * j) << base.id << " c=" << c;
      const double jo = inverse_efficiency(make_std_normal_1d(), opaque_scaled(base, c), identity_observable()).J;
      EXPECT_NEAR(jo, j, 1e-9 * j) << base.id << " opaque c=" << c;
    }
  }
}

TEST(Efficiency, MinimizingSequenceDecreases) {
  double prev = inverse_efficiency(make_std_normal_1d(), unit_speed(), identity_observable()).J;
  for (double n : {1.0, 2.0, 4.0, 8.0}) {
    const double j = inverse_efficiency(make_std_normal_1d(), flattened(n), identity_observable()).J;
    EXPECT_LT(j, prev) << "n=" << n;
    prev = j;
  }
}

TEST(Efficiency, UnknownObservable) {
  EXPECT_THROW(make_observable("cube"), config_error);
  EXPECT_EQ(make_observable("sgnlog").g(std::exp(1.0) - 1.0, 1), 1.0);
}

TEST(Efficiency, BenchmarkTableShape) {
  const EfficiencyTable t = benchmark_efficiency_table();
  ASSERT_EQ(t.algorithms.size(), 5u);
  ASSERT_EQ(t.targets.size(), 6u);
  EXPECT_EQ(t.algorithms[0], "Zig-Zag");
  EXPECT_TRUE(std::isinf(t.at(0, 2).value()));
  for (std::size_t r = 1; r < 5; ++r) {
    for (std::size_t c = 0; c < 6; ++c) {
      if (r == 1 && c == 3) continue;
      EXPECT_TRUE(std::isfinite(t.at(r, c).value())) << t.algorithms[r] << " " << t.targets[c];
    }
  }
}
