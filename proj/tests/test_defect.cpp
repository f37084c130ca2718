#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "shwave/defect.hpp"
#include "shwave/error.hpp"

using namespace shwave;

namespace {

// Grid with nodes at -1.0, -0.9, ..., 1.0.
SpatialGrid tenth_grid() { return SpatialGrid{-1.05, 0.1, 21}; }

double at(const DepthProfile& d, double x) {
  for (int i = 0; i < d.grid.size; ++i)
    if (std::abs(d.grid.x(i) - x) < 1e-9) return d.depths[static_cast<std::size_t>(i)];
  ADD_FAILURE() << "no grid node at " << x;
  return NAN;
}

}  // namespace

TEST(Defect, SampleProfileExamples) {
  const auto g = tenth_grid();
  EXPECT_EQ(at(sample_profile({DefectFamily::rectangular, 0.0, 0.2, 0.3}, g), 0.0), 0.3);
  const auto vee = sample_profile({DefectFamily::vee, 0.0, 0.4, 0.5}, g);
  EXPECT_NEAR(at(vee, 0.2), 0.0, 1e-14);
  EXPECT_NEAR(at(vee, -0.2), 0.0, 1e-14);
  EXPECT_NEAR(at(vee, 0.0), 0.5, 1e-14);
  const auto gauss = sample_profile({DefectFamily::gaussian, 0.0, 0.2, 0.4}, g);
  EXPECT_NEAR(at(gauss, 0.1), 0.2, 1e-12);
  EXPECT_NEAR(at(gauss, -0.1), 0.2, 1e-12);
}

TEST(Defect, GridMustCoverSupport) {
  const SpatialGrid g{-1.0, 0.1, 20};
  try {
    sample_profile({DefectFamily::rectangular, 0.9, 0.5, 0.2}, g);
    FAIL() << "expected grid_not_covering_support";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::grid_not_covering_support);
  }
}

TEST(Defect, SpecValidation) {
  const PlateSpec p;
  EXPECT_THROW((DefectSpec{DefectFamily::vee, 0, 1, 0.81}.validate(p)), std::invalid_argument);
  EXPECT_THROW((DefectSpec{DefectFamily::vee, 0, 0, 0.3}.validate(p)), std::invalid_argument);
  EXPECT_THROW((DefectSpec{DefectFamily::vee, 0, 1, 0.0}.validate(p)), std::invalid_argument);
  EXPECT_NO_THROW((DefectSpec{DefectFamily::vee, 0, 1, 0.8}.validate(p)));
}

TEST(Defect, LinearInMaxDepth) {
  const auto g = SpatialGrid::centered(PlateSpec{});
  for (auto f : kAllFamilies) {
    const auto a = sample_profile({f, 0.3, 1.1, 0.2}, g);
    const auto b = sample_profile({f, 0.3, 1.1, 0.4}, g);
    for (std::size_t i = 0; i < a.depths.size(); ++i) EXPECT_EQ(2.0 * a.depths[i], b.depths[i]);
  }
}

TEST(Defect, RandomSpecDeterministic) {
  const PlateSpec p;
  for (auto f : kAllFamilies) {
    Rng a(77), b(77);
    const auto s = random_spec(a, f, {-4, 4}, p);
    const auto t = random_spec(b, f, {-4, 4}, p);
    EXPECT_EQ(s.family, t.family);
    EXPECT_EQ(s.center, t.center);
    EXPECT_EQ(s.width, t.width);
    EXPECT_EQ(s.max_depth, t.max_depth);
  }
}

TEST(Defect, RandomSpecInvariantsAndCoverage) {
  const PlateSpec p;
  const auto g = SpatialGrid::centered(p);
  Rng rng(2024);
  double lo = 1e9, hi = -1e9;
  for (int i = 0; i < 10000; ++i) {
    const auto f = kAllFamilies[i % 3];
    const DefectSpec s = random_spec(rng, f, {-4, 4}, p);
    ASSERT_NO_THROW(s.validate(p));
    ASSERT_GT(s.width, 0.0);
    ASSERT_LE(std::abs(s.center) + s.support_half_width(), 2.0 + 1e-12);
    lo = std::min(lo, s.max_depth);
    hi = std::max(hi, s.max_depth);
    const auto d = sample_profile(s, g);
    for (std::size_t k = 0; k < d.depths.size(); ++k) {
      ASSERT_GE(d.depths[k], 0.0);
      ASSERT_LT(d.depths[k], p.depth());
      if (std::abs(d.grid.x(static_cast<int>(k)) - s.center) > s.support_half_width())
        ASSERT_EQ(d.depths[k], 0.0);
    }
  }
  const double tol = 0.01 * (0.8 - 0.05);
  EXPECT_LE(lo, 0.05 + tol);
  EXPECT_GE(lo, 0.05);
  EXPECT_GE(hi, 0.8 - tol);
  EXPECT_LE(hi, 0.8);
}

TEST(Defect, FamilyNames) {
  for (auto f : kAllFamilies) EXPECT_EQ(parse_family(to_string(f)), f);
  EXPECT_FALSE(parse_family("triangle").has_value());
}
