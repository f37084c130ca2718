#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "shwave/waveguide.hpp"

using namespace shwave;
constexpr double pi = std::numbers::pi;

TEST(Waveguide, AxialWavenumberExamples) {
  const PlateSpec p;
  EXPECT_NEAR(std::abs(axial_wavenumber(p, 0, 2 * pi) - cplx(2 * pi, 0)), 0.0, 1e-14);
  const cplx x1 = axial_wavenumber(p, 1, 2 * pi);
  EXPECT_NEAR(x1.real(), pi * std::sqrt(3.0), 1e-12);
  EXPECT_EQ(x1.imag(), 0.0);
  EXPECT_NEAR(x1.real(), 5.4414, 1e-4);
  const cplx x2 = axial_wavenumber(p, 1, pi / 4);
  EXPECT_EQ(x2.real(), 0.0);
  EXPECT_NEAR(x2.imag(), pi * std::sqrt(15.0) / 4, 1e-12);
  EXPECT_NEAR(x2.imag(), 3.04183, 1e-5);
}

TEST(Waveguide, ClassificationAndCutoff) {
  const PlateSpec p;
  EXPECT_EQ(make_mode(p, 0, 1.0).kind, ModeKind::propagating);
  EXPECT_EQ(make_mode(p, 1, 1.0).kind, ModeKind::evanescent);
  const Mode at = make_mode(p, 1, pi);
  EXPECT_EQ(at.kind, ModeKind::cutoff);
  EXPECT_EQ(at.xi, cplx(0.0, 0.0));
  EXPECT_EQ(make_mode(p, 3, 2.0).beta, 3 * pi / (2 * p.half_thickness));
}

TEST(Waveguide, ModeShapeExamples) {
  EXPECT_EQ(mode_shape(0, 0.0), 1.0);
  EXPECT_NEAR(mode_shape(1, pi / 2), 1.0, 1e-15);
  EXPECT_NEAR(mode_shape(2, pi), -1.0, 1e-15);
}

TEST(Waveguide, PropagatingModeCountExamples) {
  const PlateSpec p;
  EXPECT_EQ(propagating_mode_count(p, 0.1), 1);
  EXPECT_EQ(propagating_mode_count(p, 5 * pi), 5);
  EXPECT_EQ(propagating_mode_count(p, pi / 2), 1);
}

TEST(Waveguide, CountMonotoneInFrequency) {
  const PlateSpec p;
  int last = 0;
  for (int i = 1; i <= 4000; ++i) {
    const int n = propagating_mode_count(p, 0.01 * i);
    EXPECT_GE(n, last);
    last = n;
  }
}

TEST(Waveguide, ModeNormExamples) {
  const PlateSpec p;
  EXPECT_DOUBLE_EQ(mode_norm(p, 0), 1.0);
  EXPECT_DOUBLE_EQ(mode_norm(p, 1), 0.5);
  EXPECT_DOUBLE_EQ(mode_norm(p, 4), 0.5);
}

// Composite Simpson on [-b, b]; the integrands are smooth trigonometric products.
TEST(Waveguide, OrthogonalityByQuadrature) {
  const PlateSpec p;
  const double b = p.half_thickness;
  const int n_int = 4000;
  const double h = 2 * b / n_int;
  for (int n = 0; n <= 10; ++n) {
    for (int m = 0; m <= 10; ++m) {
      auto f = [&](double x2) {
        const double bn = n * pi / (2 * b), bm = m * pi / (2 * b);
        return mode_shape(n, bn * x2) * mode_shape(m, bm * x2);
      };
      double s = f(-b) + f(b);
      for (int i = 1; i < n_int; ++i) s += (i % 2 ? 4.0 : 2.0) * f(-b + i * h);
      s *= h / 3;
      if (n != m) EXPECT_LT(std::abs(s), 1e-10) << n << "," << m;
      else EXPECT_NEAR(s, mode_norm(p, n), 1e-10);
    }
  }
}

TEST(Waveguide, DispersionConsistency) {
  const PlateSpec p{0.7, 1.3, 2.0};
  for (double omega : {0.3, 1.0, 2.5, 7.0, 19.0}) {
    for (int n = 0; n < 12; ++n) {
      const cplx xi = axial_wavenumber(p, n, omega);
      const double beta = n * pi / p.depth();
      const double k2 = omega * omega / (p.shear_velocity * p.shear_velocity);
      EXPECT_LE(std::abs(xi * xi + beta * beta - k2), 1e-12 * std::max(k2, beta * beta));
      if (xi.imag() != 0.0) EXPECT_GT(xi.imag(), 0.0);
      EXPECT_GE(xi.real(), 0.0);
    }
  }
}

TEST(Waveguide, RejectsInvalidPlate) {
  EXPECT_THROW((PlateSpec{0.0, 1.0, 1.0}.validate()), std::invalid_argument);
  EXPECT_THROW((PlateSpec{0.5, -1.0, 1.0}.validate()), std::invalid_argument);
  EXPECT_NO_THROW(PlateSpec{}.validate());
}
