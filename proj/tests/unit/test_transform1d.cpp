#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

#include "suzz/transform1d.hpp"

using namespace suzz;

namespace {

double oracle_f(const SpeedFunction& s, double x) {
  boost::math::quadrature::tanh_sinh<double> rule;
  if (x == 0.0) return 0.0;
  const double v = rule.integrate([&](double u) { return 1.0 / s.at1(u); }, 0.0, std::abs(x), 1e-14);
  return x > 0 ? v : -v;
}

}  // namespace

TEST(Transform, Identity) {
  const SpaceTransform tr(unit_speed(), make_std_normal_1d());
  EXPECT_TRUE(std::isinf(tr.m_plus()));
  EXPECT_TRUE(std::isinf(tr.m_minus()));
  for (double x : {-5.0, 0.0, 0.3, 17.0}) {
    EXPECT_EQ(tr.f(x), x);
    EXPECT_EQ(tr.V_prime(x), x);
  }
}

TEST(Transform, ArcsinhAndArctan) {
  const SpaceTransform sh(poly_radial(0.0), make_student_t_1d(1));
  const SpaceTransform tn(poly_radial(1.0), make_student_t_1d(1));
  EXPECT_TRUE(std::isinf(sh.m_plus()));
  EXPECT_NEAR(tn.m_plus(), M_PI_2, 1e-14);
  EXPECT_NEAR(tn.m_minus(), M_PI_2, 1e-14);
  for (double x = -40.0; x <= 40.0; x += 1.3) {
    EXPECT_NEAR(sh.f(x), oracle_f(poly_radial(0.0), x), 1e-12 * (1.0 + std::abs(x)));
    EXPECT_NEAR(tn.f(x), oracle_f(poly_radial(1.0), x), 1e-12);
    EXPECT_NEAR(sh.f(x), std::asinh(x), 1e-12 * (1.0 + std::abs(x)));
    EXPECT_NEAR(tn.f(x), std::atan(x), 1e-13);
  }
  EXPECT_THROW(tn.f_inv(M_PI_2), explosion_error);
  EXPECT_THROW(tn.f_inv(-2.0), explosion_error);
}

TEST(Transform, InverseRoundTrip) {
  for (double eps : {0.0, 0.5, 1.0}) {
    const SpaceTransform tr(poly_radial(eps), make_student_t_1d(1));
    double prev = -kInf;
    for (double x = -30.0; x <= 30.0; x += 0.37) {
      const double y = tr.f(x);
      EXPECT_GT(y, prev);
      prev = y;
      EXPECT_NEAR(tr.f_inv(y), x, 1e-9 * std::max(1.0, std::abs(x))) << "eps=" << eps;
    }
  }
}

TEST(Transform, PotentialGradientIsA) {
  for (double eps : {0.0, 0.5, 0.9}) {
    const RateSpec rs(make_student_t_1d(1), poly_radial(eps));
    const SpaceTransform tr(rs.speed, rs.target);
    for (double x = -25.0; x <= 25.0; x += 0.5) {
      const double a = A(rs, Vec{x})[0];
      EXPECT_NEAR(transformed_potential_grad(tr, tr.f(x)), a, 1e-9 * std::max(1.0, std::abs(a)));
    }
  }
  const SpaceTransform tr(poly_radial(0.5), make_student_t_1d(1));
  EXPECT_NEAR(tr.V_prime(tr.f(1.0)), 0.5 * std::pow(2.0, -0.25), 1e-12);
  EXPECT_NEAR(tr.V_prime(tr.f(1.0)), 0.42045, 1e-5);
  const SpaceTransform nz(poly_radial(0.0), make_std_normal_1d());
  EXPECT_EQ(nz.V_prime(0.0), 0.0);
}

TEST(Transform, PotentialMatchesFiniteDifference) {
  const SpaceTransform tr(poly_radial(0.5), make_student_t_1d(1));
  for (double w = -0.95; w <= 0.95; w += 0.1) {
    const double y = w * tr.m_plus();
    const double h = 1e-5;
    const double fd = (tr.V(y + h) - tr.V(y - h)) / (2.0 * h);
    EXPECT_NEAR(tr.V_prime(y), fd, 1e-6 * (1.0 + std::abs(fd)));
  }
}

TEST(Equivalence, UnitSpeedIsExact) {
  const RateSpec rs(make_std_normal_1d(), unit_speed());
  const EquivalenceReport r = equivalence_check(rs, 0.2, 1, 500, 7);
  EXPECT_EQ(r.n_events, 500u);
  EXPECT_EQ(r.max_time_discrepancy, 0.0);
  EXPECT_EQ(r.max_position_discrepancy, 0.0);
}

TEST(Equivalence, CauchyHalfSpeed) {
  const RateSpec rs(make_student_t_1d(1), poly_radial(0.5));
  const EquivalenceReport r = equivalence_check(rs, 0.0, 1, 300, 11);
  EXPECT_EQ(r.n_events, 300u);
  EXPECT_LT(r.max_time_discrepancy, 1e-6);
  EXPECT_LT(r.max_position_discrepancy, 1e-6);
  EXPECT_TRUE(std::isfinite(r.m_plus));
  EXPECT_GT(r.min_boundary_distance, 0.0);
}

TEST(Equivalence, TangentSpeedOnNormalStaysInside) {
  const RateSpec rs(make_std_normal_1d(), poly_radial(1.0));
  const EquivalenceReport r = equivalence_check(rs, 0.0, 1, 300, 5);
  EXPECT_NEAR(r.m_plus, M_PI_2, 1e-14);
  EXPECT_GT(r.min_boundary_distance, 0.0);
  EXPECT_LT(r.max_time_discrepancy, 1e-6);
}

TEST(Equivalence, CauchyTangentSpeedExplodes) {
  // A is identically zero here
  const RateSpec rs(make_student_t_1d(1), poly_radial(1.0));
  EXPECT_THROW(equivalence_check(rs, 0.0, 1, 10, 1), explosion_error);
}

TEST(Equivalence, RequiresCanonicalRates) {
  const RateSpec rs(make_std_normal_1d(), unit_speed(), Vec{0.5});
  EXPECT_THROW(equivalence_check(rs, 0.0, 1, 10, 1), error);
}
