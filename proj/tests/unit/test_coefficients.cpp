#include <gtest/gtest.h>

#include <cmath>

#include "towlab/coefficients.hpp"
#include "towlab/geometry.hpp"

using namespace towlab;

namespace {

Vec pt(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST(CoefficientsTest, OrthogonalArithmetic) {
  const CoefficientPair a = coeffs(Variant::orthogonal, 2.0, 2);
  EXPECT_DOUBLE_EQ(a.alpha, 0.25);
  EXPECT_DOUBLE_EQ(a.beta, 0.75);
  const CoefficientPair b = coeffs(Variant::orthogonal, 4.0, 3);
  EXPECT_DOUBLE_EQ(b.alpha, 3.0 / 7.0);
  EXPECT_DOUBLE_EQ(b.beta, 1.0 - 3.0 / 7.0);
  const CoefficientPair c = coeffs(Variant::orthogonal, kInfinity, 2);
  EXPECT_EQ(c.alpha, 1.0);
  EXPECT_EQ(c.beta, 0.0);
  EXPECT_THROW(coeffs(Variant::orthogonal, 1.0, 2), DomainError);
  EXPECT_THROW(coeffs(Variant::orthogonal, 0.5, 2), DomainError);
}

TEST(CoefficientsTest, FullBallArithmetic) {
  const CoefficientPair a = coeffs(Variant::fullball, 6.0, 2);
  EXPECT_DOUBLE_EQ(a.alpha, 0.5);
  EXPECT_DOUBLE_EQ(a.beta, 0.5);
  const CoefficientPair b = coeffs(Variant::fullball, 2.0 + 1e-9, 2);
  EXPECT_NEAR(b.alpha, 0.0, 1e-9);
  EXPECT_NEAR(b.beta, 1.0, 1e-9);
  EXPECT_THROW(coeffs(Variant::fullball, 2.0, 2), DomainError);
  const ExponentField two = ExponentField::constant(2.0);
  EXPECT_THROW(coeffs_fullball_variant(two, pt(0, 0)), DomainError);
  // the solver-side closure accepts the p -> 2+ limit
  const CoefficientPair c = coeffs_closed(Variant::fullball, two, pt(0, 0));
  EXPECT_EQ(c.alpha, 0.0);
  EXPECT_EQ(c.beta, 1.0);
}

TEST(CoefficientsTest, SumIsExactlyOneAndMonotone) {
  Rng rng(1);
  std::uniform_real_distribution<double> pd(1.0001, 50.0);
  for (int k = 0; k < 2000; ++k) {
    const int n = 2 + k % 4;
    const double p = pd(rng);
    const CoefficientPair a = coeffs(Variant::orthogonal, p, n);
    EXPECT_EQ(a.alpha + a.beta, 1.0);
    const CoefficientPair b = coeffs(Variant::orthogonal, p + 0.5, n);
    EXPECT_GT(b.alpha, a.alpha);
    if (p > 2.0) {
      const CoefficientPair c = coeffs(Variant::fullball, p, n);
      EXPECT_EQ(c.alpha + c.beta, 1.0);
    }
  }
}

TEST(CoefficientsTest, FieldsEvaluateAndValidate) {
  const ExponentField f = ExponentField::radial_holder(2.5, 0.5, pt(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(f(pt(0.0, 0.0)), 2.5);
  EXPECT_DOUBLE_EQ(f(pt(0.0, 0.25)), 2.75);
  EXPECT_DOUBLE_EQ(f.p_min(), 2.5);
  EXPECT_DOUBLE_EQ(f.s(), 0.5);
  EXPECT_THROW(ExponentField::constant(1.0), DomainError);
  EXPECT_THROW(ExponentField::radial_holder(2.0, -1.0, pt(0, 0), 0.5), DomainError);
  EXPECT_TRUE(ExponentField::constant(3.0).is_constant());
  EXPECT_EQ(variant_from_string("fullball"), Variant::fullball);
  EXPECT_THROW(variant_from_string("sideways"), DomainError);
}

TEST(CoefficientsTest, DeclaredHolderBoundHoldsOnSamples) {
  Rng rng(2);
  Vec g(2);
  g << 0.4, -0.3;
  const ExponentField fields[] = {
      ExponentField::radial_holder(3.0, 0.7, pt(0.1, -0.2), 0.5),
      ExponentField::affine(3.0, g, pt(0, 0), 1.0, 0.5),
  };
  for (const ExponentField& f : fields) {
    for (int k = 0; k < 5000; ++k) {
      const Vec x = sample_unit_ball(2, rng);
      const Vec z = sample_unit_ball(2, rng);
      const double d = (x - z).norm();
      EXPECT_LE(std::abs(f(x) - f(z)), f.c_p() * std::pow(d, f.s()) + 1e-12);
      EXPECT_GE(f(x), f.p_min() - 1e-12);
    }
  }
}

TEST(CoefficientsTest, AlphaChainBound) {
  Rng rng(3);
  const ExponentField f = ExponentField::radial_holder(2.5, 1.0, pt(0, 0), 0.5);
  for (Variant v : {Variant::orthogonal, Variant::fullball}) {
    const double factor = alpha_chain_factor(v, f.p_min(), 2);
    EXPECT_DOUBLE_EQ(factor, (v == Variant::orthogonal ? 3.0 : 4.0) / std::pow(2.0 + 2.5, 2));
    for (int k = 0; k < 5000; ++k) {
      const Vec x = sample_unit_ball(2, rng);
      const Vec z = sample_unit_ball(2, rng);
      const double da = std::abs(coeffs(v, f, x).alpha - coeffs(v, f, z).alpha);
      EXPECT_LE(da, factor * std::abs(f(x) - f(z)) + 1e-12);
    }
    EXPECT_DOUBLE_EQ(alpha_min(f, v, 2), coeffs(v, 2.5, 2).alpha);
  }
}

TEST(EstimateHolderTest, ConstantFieldGivesZero) {
  Rng rng(4);
  std::vector<std::pair<Vec, Vec>> pairs;
  for (int k = 0; k < 50; ++k) pairs.emplace_back(sample_unit_ball(2, rng), sample_unit_ball(2, rng));
  const PowerFit fit = estimate_holder(ExponentField::constant(3.0), Variant::orthogonal, pairs);
  EXPECT_EQ(fit.constant, 0.0);
  EXPECT_EQ(fit.exponent, 1.0);
  pairs.resize(5);
  EXPECT_THROW(estimate_holder(ExponentField::constant(3.0), Variant::orthogonal, pairs), DomainError);
}

TEST(EstimateHolderTest, LipschitzKinkField) {
  // p = 3 + |x1|, pairs on one side of the kink
  const ExponentField f = ExponentField::custom([](const Vec& x) { return 3.0 + std::abs(x[0]); }, 1.0, 1.0, 3.0);
  Rng rng(5);
  std::uniform_real_distribution<double> u(0.05, 0.5), d(1e-4, 1e-1);
  std::vector<std::pair<Vec, Vec>> pairs;
  for (int k = 0; k < 400; ++k) {
    const Vec x = pt(u(rng), 0.0);
    pairs.emplace_back(x, pt(x[0] + d(rng), 0.0));
  }
  const PowerFit fit = estimate_holder(f, Variant::orthogonal, pairs);
  EXPECT_NEAR(fit.exponent, 1.0, 0.05);
}

TEST(EstimateHolderTest, SquareRootField) {
  // p = 3 + |x1|^{1/2}, pairs anchored on the axis
  const ExponentField f =
      ExponentField::custom([](const Vec& x) { return 3.0 + std::sqrt(std::abs(x[0])); }, 0.5, 1.0, 3.0);
  Rng rng(6);
  std::uniform_real_distribution<double> le(std::log(1e-6), std::log(1e-3));
  std::vector<std::pair<Vec, Vec>> pairs;
  for (int k = 0; k < 400; ++k) pairs.emplace_back(pt(0.0, 0.0), pt(std::exp(le(rng)), 0.0));
  const PowerFit fit = estimate_holder(f, Variant::orthogonal, pairs);
  EXPECT_NEAR(fit.exponent, 0.5, 0.05);
}

TEST(PowerFitTest, RecoversExactPowerLaw) {
  std::vector<double> d, y;
  for (int k = 1; k <= 20; ++k) {
    d.push_back(0.01 * k);
    y.push_back(2.0 * std::pow(0.01 * k, 0.7));
  }
  const PowerFit fit = fit_power_law(d, y);
  EXPECT_NEAR(fit.exponent, 0.7, 1e-10);
  EXPECT_NEAR(fit.constant, 2.0, 1e-9);
  EXPECT_EQ(fit.used, 20);
}
