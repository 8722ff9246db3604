#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sia/physics.hpp"
#include "support.hpp"

using namespace sia;

TEST(Physics, AlphaExamples) {
  EXPECT_DOUBLE_EQ(alpha_of(3.0), 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(alpha_of(5.0), 1.4);
  EXPECT_NEAR(alpha_of(2.8), 7.4 / 5.6, 1e-15);
  EXPECT_THROW(alpha_of(1.0), std::invalid_argument);
  for (double p = 1.01; p <= 100.0; p *= 1.07) {
    const double a = alpha_of(p);
    EXPECT_GT(a, 1.0);
    EXPECT_LT(a, 2.0);
  }
}

TEST(Physics, ThicknessTransform) {
  EXPECT_EQ(thickness_from_u(0.0, 3.0), 0.0);
  EXPECT_DOUBLE_EQ(thickness_from_u(1.0, 4.0), 1.0);
  EXPECT_NEAR(thickness_from_u(64.0, 3.0), 4.0, 1e-14);
  EXPECT_NEAR(u_from_thickness(4.0, 3.0), 64.0, 1e-12);
  EXPECT_EQ(u_from_thickness(0.0, 3.0), 0.0);
  EXPECT_NEAR(u_from_thickness(2.5198421, 3.0), 16.0, 1e-6);
  EXPECT_THROW(thickness_from_u(-1.0, 3.0), std::invalid_argument);
  EXPECT_THROW(u_from_thickness(-1.0, 3.0), std::invalid_argument);
}

TEST(Physics, ThicknessRoundTrip) {
  for (double p : {2.8, 3.0, 4.0, 5.0}) {
    for (double u = 1e-6; u <= 1e6; u *= 3.7) {
      EXPECT_NEAR(u_from_thickness(thickness_from_u(u, p), p), u, 1e-10 * u) << p << " " << u;
    }
  }
}

TEST(Physics, GlenCoefficient) {
  EXPECT_NEAR(glen_mu(1.0, 3.0, 3.0), 0.5, 1e-15);
  EXPECT_NEAR(glen_mu(2.0, 3.0, 3.0), 1.0, 1e-15);
  EXPECT_THROW(glen_mu(0.0, 3.0, 3.0), std::invalid_argument);
  EXPECT_THROW(glen_mu(1.0, 0.0, 3.0), std::invalid_argument);
}

TEST(Physics, NegativePart) {
  EXPECT_EQ(neg_part(-2.0), 2.0);
  EXPECT_EQ(neg_part(3.0), 0.0);
  EXPECT_EQ(neg_part(0.0), 0.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-5.0, 5.0);
  for (int k = 0; k < 1000; ++k) {
    const double a = d(rng);
    const double b = d(rng);
    EXPECT_EQ(neg_part(a), 0.5 * (std::abs(a) - a));
    // min(., 0) is nondecreasing and 1-Lipschitz
    EXPECT_LE(std::abs(std::min(a, 0.0) - std::min(b, 0.0)), std::abs(a - b));
    if (a < b) EXPECT_LE(-neg_part(a), -neg_part(b));
  }
}

TEST(Physics, PhiPower) {
  EXPECT_EQ(phi_power(0.0, 4.0 / 3.0), 0.0);
  EXPECT_DOUBLE_EQ(phi_power(1.0, 1.7), 1.0);
  EXPECT_NEAR(phi_power(-8.0, 4.0 / 3.0), -2.0, 1e-14);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(-10.0, 10.0);
  for (double alpha : {4.0 / 3.0, 1.4, 1.9}) {
    for (int k = 0; k < 500; ++k) {
      const double a = d(rng);
      const double b = d(rng);
      EXPECT_EQ(phi_power(-a, alpha), -phi_power(a, alpha));
      if (a != b) EXPECT_GT((phi_power(a, alpha) - phi_power(b, alpha)) * (a - b), 0.0);
    }
  }
}

TEST(Physics, RegularizedPowerConsistency) {
  const double alpha = 4.0 / 3.0;
  for (double u : {-3.0, -0.2, 0.0, 1e-3, 2.5}) {
    EXPECT_EQ(phi_power_reg(u, alpha, 0.0), phi_power(u, alpha));
    const double eps = 1e-2;
    const double h = 1e-6;
    const double fd = (phi_power_reg_potential(u + h, alpha, eps) - phi_power_reg_potential(u - h, alpha, eps)) / (2 * h);
    EXPECT_NEAR(fd, phi_power_reg(u, alpha, eps), 1e-7);
    const double fd2 = (phi_power_reg(u + h, alpha, eps) - phi_power_reg(u - h, alpha, eps)) / (2 * h);
    EXPECT_NEAR(fd2, phi_power_reg_derivative(u, alpha, eps), 1e-5 * std::max(1.0, std::abs(fd2)));
  }
  EXPECT_EQ(phi_power_reg_potential(0.0, alpha, 1e-3), 0.0);
}

TEST(Physics, DiagnosticFlux) {
  const auto mesh = StructuredMesh::build(4, 4, 1.0, 1.0);
  PhysicalParams params = PhysicalParams::uniform(mesh, 3.0, 1.0, Forcing{}, mesh.zero_field());
  for (const Vec2 q : diagnostic_flux(mesh, mesh.zero_field(), params)) {
    EXPECT_EQ(q.x, 0.0);
    EXPECT_EQ(q.y, 0.0);
  }
  const auto ux = sample(mesh, [](Vec2 x) { return x.x; });
  for (const Vec2 q : diagnostic_flux(mesh, ux, params)) {
    EXPECT_NEAR(q.x, -1.0, 1e-12);
    EXPECT_NEAR(q.y, 0.0, 1e-12);
  }
  params = PhysicalParams::uniform(mesh, 3.0, 2.0, Forcing{}, mesh.zero_field());
  const auto u34 = sample(mesh, [](Vec2 x) { return 3.0 * x.x + 4.0 * x.y; });
  for (const Vec2 q : diagnostic_flux(mesh, u34, params)) {
    EXPECT_NEAR(q.x, -30.0, 1e-10);
    EXPECT_NEAR(q.y, -40.0, 1e-10);
  }
}

TEST(PhysicalParams, Validation) {
  const auto mesh = StructuredMesh::build(4, 4, 1.0, 1.0);
  NodalField u0 = mesh.zero_field();
  u0[mesh.node_index(1, 1)] = 0.3;
  PhysicalParams ok = PhysicalParams::uniform(mesh, 3.0, 1.0, Forcing{}, u0);
  {
    test::WarningCapture w;
    EXPECT_NO_THROW(ok.validate(mesh));
    EXPECT_TRUE(w.messages.empty());
  }

  {
    test::WarningCapture w;
    PhysicalParams p2 = PhysicalParams::uniform(mesh, 2.0, 1.0, Forcing{}, u0);
    EXPECT_NO_THROW(p2.validate(mesh));
    ASSERT_EQ(w.messages.size(), 1u);
    EXPECT_NE(w.messages[0].find("outside"), std::string::npos);
  }
  {
    test::WarningCapture w;
    PhysicalParams z = PhysicalParams::uniform(mesh, 3.0, 1.0, Forcing{}, mesh.zero_field());
    EXPECT_NO_THROW(z.validate(mesh));
    EXPECT_EQ(w.messages.size(), 1u);
  }

  PhysicalParams bad = ok;
  bad.u0[mesh.node_index(1, 1)] = -1e-3;
  EXPECT_THROW(bad.validate(mesh), std::invalid_argument);
  bad = ok;
  bad.u0[0] = 1.0;
  EXPECT_THROW(bad.validate(mesh), std::invalid_argument);
  bad = ok;
  bad.mu[3] = 5.0;
  EXPECT_THROW(bad.validate(mesh), std::invalid_argument);
  bad = ok;
  bad.alpha = 1.5;
  EXPECT_THROW(bad.validate(mesh), std::invalid_argument);
  bad = ok;
  bad.forcing = Forcing(MeltForcing{-1.0});
  EXPECT_THROW(bad.validate(mesh), std::invalid_argument);
}
