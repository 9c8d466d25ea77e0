#include <gtest/gtest.h>

#include <cmath>

#include "towlab/dpp.hpp"

using namespace towlab;

namespace {

Vec pt(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Domain unit_square(double eps) { return Domain::box_from_corners(pt(0, 0), pt(1, 1), eps); }

double interior_residual(const GridField& a, const GridField& b) {
  double r = 0.0;
  for (std::size_t i : a.interior()) r = std::max(r, std::abs(a[i] - b[i]));
  return r;
}

}  // namespace

TEST(MidrangeTest, Examples) {
  EXPECT_DOUBLE_EQ(midrange({1.0, 3.0}), 2.0);
  EXPECT_DOUBLE_EQ(midrange({2.5}), 2.5);
  EXPECT_DOUBLE_EQ(midrange({-1.0, 0.0, 7.0}), 3.0);
  EXPECT_THROW(midrange({}), DomainError);
}

TEST(DomainTest, ContainsAndLattice) {
  const Domain d = unit_square(0.1);
  EXPECT_TRUE(d.contains(pt(0.5, 0.5)));
  EXPECT_FALSE(d.contains(pt(1.0, 0.5)));
  const Domain b = Domain::ball(pt(0, 0), 1.0, 0.1);
  EXPECT_TRUE(b.contains(pt(0.6, 0.6)));
  EXPECT_FALSE(b.contains(pt(0.8, 0.8)));
  EXPECT_THROW(Domain::ball(pt(0, 0), 1.0, 0.6), DomainError);
  const GridField u = GridField::make(d, 0.05);
  for (std::size_t i : u.interior()) EXPECT_TRUE(d.contains(u.point(i)));
  EXPECT_TRUE(u.lattice().in_hull(pt(-0.1, 1.1)));
}

TEST(AvgOperatorTest, AffineIsCentredAndInfinityIsPureStep) {
  const Domain d = unit_square(0.1);
  GridField u = GridField::make(d, 0.025);
  u.fill([](const Vec& y) { return 1.0 + 2.0 * y[0] - 0.5 * y[1]; });
  const QuadratureRule q = ball_quadrature(2, 16);
  const Vec x = pt(0.5, 0.4);
  const UnitVector nu = UnitVector::normalized(pt(0.6, 0.8));
  const CoefficientPair ab{0.3, 0.7};
  const Vec y = x + 0.1 * nu.coords();
  EXPECT_NEAR(avg_operator(u, x, nu, ab, Variant::orthogonal, q), 0.3 * u.interpolate(y) + 0.7 * u.interpolate(x),
              1e-12);
  const CoefficientPair inf{1.0, 0.0};
  EXPECT_NEAR(avg_operator(u, x, nu, inf, Variant::orthogonal, q), u.interpolate(y), 1e-14);
}

TEST(AvgOperatorTest, QuadraticExpansion) {
  // Nodes sit on the lattice (h = eps / 4, nu = e1), so interpolation is exact and the
  // noise term equals beta (|x|^2 + eps^2 avg zeta^2) with avg zeta^2 = 5/16 for m = 4.
  const double eps = 0.1;
  const Domain d = unit_square(eps);
  GridField u = GridField::make(d, eps / 4);
  u.fill([](const Vec& y) { return y.squaredNorm(); });
  const QuadratureRule q = ball_quadrature(2, 4);
  Vec x = u.point(u.interior()[u.interior().size() / 2]);
  const UnitVector nu = UnitVector::axis(2, 0);
  const CoefficientPair ab{0.25, 0.75};
  const double got = avg_operator(u, x, nu, ab, Variant::orthogonal, q);
  const double want = 0.25 * (x + eps * nu.coords()).squaredNorm() + 0.75 * (x.squaredNorm() + eps * eps * 5.0 / 16.0);
  EXPECT_NEAR(got, want, 1e-10);
}

TEST(AvgOperatorTest, StripTooThinThrows) {
  const Domain d = unit_square(0.1);
  GridField u = GridField::make(d, 0.05);
  u.fill([](const Vec&) { return 0.0; });
  const QuadratureRule q = ball_quadrature(2, 16);
  EXPECT_THROW(avg_operator(u, pt(-0.3, 0.5), UnitVector::axis(2, 0, -1.0), CoefficientPair{0.5, 0.5},
                            Variant::orthogonal, q),
               StripError);
}

class DppVariantTest : public ::testing::TestWithParam<std::tuple<Variant, int>> {};

TEST_P(DppVariantTest, ConstantsAndAffineAreFixed) {
  const auto [variant, n] = GetParam();
  const double eps = n == 2 ? 0.1 : 0.2;
  const Domain d = Domain::box(Vec::Zero(n), Vec::Constant(n, 0.5), eps);
  const GridField layout = GridField::make(d, eps / 2);
  const ExponentField field = ExponentField::constant(variant == Variant::fullball ? 4.0 : 3.0);
  const DppScheme scheme(layout, field, DppSetup{.variant = variant});

  GridField c(layout);
  c.fill([](const Vec&) { return 0.7; });
  EXPECT_LE(interior_residual(scheme.apply(c), c), 1e-14);

  Vec a = Vec::LinSpaced(n, 1.0, -0.5);
  GridField u(layout);
  u.fill([&](const Vec& y) { return 0.3 + a.dot(y); });
  EXPECT_LE(interior_residual(scheme.apply(u), u), 1e-10);
}

INSTANTIATE_TEST_SUITE_P(Variants, DppVariantTest,
                         ::testing::Combine(::testing::Values(Variant::orthogonal, Variant::fullball),
                                            ::testing::Values(2, 3)),
                         [](const auto& info) {
                           return to_string(std::get<0>(info.param)) + "_n" + std::to_string(std::get<1>(info.param));
                         });

TEST(DppSchemeTest, HarmonicProductFixedUnderBallAverage) {
  const Domain d = unit_square(0.1);
  const GridField layout = GridField::make(d, 0.05);
  const DppScheme scheme(layout, ExponentField::constant(2.0), DppSetup{.variant = Variant::fullball});
  GridField u(layout);
  u.fill([](const Vec& y) { return y[0] * y[1]; });
  EXPECT_LE(interior_residual(scheme.apply(u), u), 1e-10);
}

TEST(DppSchemeTest, MonotoneAndNonexpansive) {
  const Domain d = unit_square(0.1);
  const GridField layout = GridField::make(d, 0.05);
  Rng rng(9);
  std::uniform_real_distribution<double> unif(-1.0, 1.0), pos(0.0, 0.5);
  for (Variant variant : {Variant::orthogonal, Variant::fullball}) {
    const ExponentField field = ExponentField::radial_holder(2.5, 0.5, pt(0.5, 0.5), 0.5);
    const DppScheme scheme(layout, field, DppSetup{.variant = variant});
    for (int trial = 0; trial < 5; ++trial) {
      GridField u(layout), v(layout);
      for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = unif(rng);
        v[i] = u[i] + pos(rng);
      }
      const GridField au = scheme.apply(u);
      const GridField av = scheme.apply(v);
      double in_diff = 0.0, out_diff = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) in_diff = std::max(in_diff, std::abs(u[i] - v[i]));
      for (std::size_t i : u.interior()) {
        EXPECT_LE(au[i], av[i] + 1e-14);
        out_diff = std::max(out_diff, std::abs(au[i] - av[i]));
      }
      EXPECT_LE(out_diff, in_diff + 1e-14);
    }
  }
}

TEST(SolveTest, ConstantDatumConvergesImmediately) {
  const Domain d = unit_square(0.1);
  const GridField layout = GridField::make(d, 0.05);
  const DppScheme scheme(layout, ExponentField::constant(3.0), DppSetup{});
  const SolveResult r = solve_fixed_point(BoundaryDatum::constant(1.5), layout, scheme);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 1);
  for (std::size_t i : r.field.interior()) EXPECT_NEAR(r.field[i], 1.5, 1e-15);
}

TEST(SolveTest, AffineDatumGivesAffineExtension) {
  const Domain d = unit_square(0.1);
  const GridField layout = GridField::make(d, 0.05);
  const BoundaryDatum g = BoundaryDatum::affine(0.2, pt(1.0, -0.4));
  for (Variant variant : {Variant::orthogonal, Variant::fullball}) {
    const DppScheme scheme(layout, ExponentField::constant(4.0), DppSetup{.variant = variant});
    SolveOptions so;
    so.tol = 1e-10;
    const SolveResult r = solve_fixed_point(g, layout, scheme, so);
    ASSERT_TRUE(r.converged);
    double err = 0.0;
    for (std::size_t i : r.field.interior()) err = std::max(err, std::abs(r.field[i] - g(r.field.point(i))));
    EXPECT_LE(err, r.error_bound + 1e-9);
  }
}

TEST(SolveTest, MaximumPrincipleAndHarmonicOracle) {
  const Domain d = unit_square(0.1);
  const GridField layout = GridField::make(d, 0.05);
  const BoundaryDatum g = BoundaryDatum::quadratic_harmonic();
  const DppScheme scheme(layout, ExponentField::constant(2.0), DppSetup{.variant = Variant::fullball});
  const SolveResult r = solve_fixed_point(g, layout, scheme);
  ASSERT_TRUE(r.converged);
  double err = 0.0;
  for (std::size_t i : r.field.interior()) {
    EXPECT_GE(r.field[i], r.field.strip_min() - 1e-10);
    EXPECT_LE(r.field[i], r.field.strip_max() + 1e-10);
    err = std::max(err, std::abs(r.field[i] - g(r.field.point(i))));
  }
  EXPECT_LE(err, 0.05);
  EXPECT_FALSE(r.residual_history.empty());
}

TEST(SolveTest, HolderFieldRespectsMaximumPrinciple) {
  const Domain d = Domain::box(pt(0, 0), pt(0.75, 0.75), 0.2);
  const GridField layout = GridField::make(d, 0.1);
  const BoundaryDatum g = BoundaryDatum::polynomial({{1.0, {1, 0}}, {0.5, {1, 1}}});
  const DppScheme scheme(layout, ExponentField::radial_holder(2.5, 0.5, pt(0, 0), 0.5),
                         DppSetup{.variant = Variant::fullball});
  const SolveResult r = solve_fixed_point(g, layout, scheme);
  EXPECT_TRUE(r.converged);
  for (std::size_t i : r.field.interior()) {
    EXPECT_GE(r.field[i], r.field.strip_min() - 1e-10);
    EXPECT_LE(r.field[i], r.field.strip_max() + 1e-10);
  }
}

TEST(SolveTest, NonConvergenceIsFlaggedNotThrown) {
  const Domain d = unit_square(0.1);
  const GridField layout = GridField::make(d, 0.05);
  const DppScheme scheme(layout, ExponentField::constant(3.0), DppSetup{});
  SolveOptions so;
  so.max_iter = 2;
  so.tol = 1e-14;
  const SolveResult r = solve_fixed_point(BoundaryDatum::quadratic_harmonic(), layout, scheme, so);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 2);
}

TEST(DirectionRefinementTest, ChangeShrinks) {
  const Domain d = unit_square(0.1);
  const GridField layout = GridField::make(d, 0.05);
  const BoundaryDatum g = BoundaryDatum::quadratic_harmonic();
  const ExponentField f = ExponentField::constant(4.0);
  std::vector<GridField> sols;
  for (int m : {16, 32, 64}) {
    const DppScheme s(layout, f, DppSetup{.variant = Variant::orthogonal, .directions = m});
    SolveOptions so;
    so.tol = 1e-10;
    sols.push_back(solve_fixed_point(g, layout, s, so).field);
  }
  const double d1 = interior_residual(sols[0], sols[1]);
  const double d2 = interior_residual(sols[1], sols[2]);
  RecordProperty("change_16_32", std::to_string(d1));
  RecordProperty("change_32_64", std::to_string(d2));
  EXPECT_GE(d1, 0.0);
  EXPECT_GE(d2, 0.0);
}
