#include <gtest/gtest.h>

#include <cmath>

#include "entrolab/flux.hpp"
#include "entrolab/rng.hpp"
#include "test_support.hpp"

using namespace entrolab;

TEST(Evaluate, KnownValues) {
  auto [a, ap] = FluxFunction::burgers().evaluate(2.0);
  EXPECT_DOUBLE_EQ(a, 2.0);
  EXPECT_DOUBLE_EQ(ap, 2.0);

  auto [b, bp] = FluxFunction::power(2.0).evaluate(-1.0);
  EXPECT_DOUBLE_EQ(b, 1.0);
  EXPECT_DOUBLE_EQ(bp, -3.0);

  auto [c, cp] = FluxFunction::power(1.0).evaluate(0.5);
  EXPECT_DOUBLE_EQ(c, 0.25);
  EXPECT_DOUBLE_EQ(cp, 1.0);
}

TEST(Evaluate, OutsideDomainThrows) {
  EXPECT_THROW(FluxFunction::burgers(Interval(-1, 1)).evaluate(1.5), DomainError);
}

TEST(Evaluate, DerivativeMatchesCentralDifferences) {
  for (auto& [name, flux] : entrolab::testing::flux_zoo()) {
    SplitMix64 rng(3);
    for (int k = 0; k < 100; ++k) {
      const double v = rng.uniform(-4, 4);
      const double h = 1e-4;
      const double fd = (flux.a(v + h) - flux.a(v - h)) / (2 * h);
      EXPECT_NEAR(fd, flux.a_prime(v), 1e-6 * (1 + std::abs(flux.a_prime(v)))) << name << " at " << v;
    }
  }
}

TEST(Construction, RejectsNonConvexAndSmallBeta) {
  EXPECT_THROW(FluxFunction::power(0.5), DomainError);
  EXPECT_THROW(FluxFunction::polynomial({0.0, 0.0, 0.0, 1.0}), DomainError);  // v^3
  EXPECT_THROW(FluxFunction::polynomial({0.0, 1.0}), DomainError);
  EXPECT_NO_THROW(FluxFunction::polynomial({0.0, 0.0, 1.0, 0.1}, Interval(-2, 2)));
}

TEST(SecondDerivativeMass, KnownValues) {
  EXPECT_DOUBLE_EQ(second_derivative_mass(FluxFunction::burgers(), Interval(0, 1)), 1.0);
  EXPECT_DOUBLE_EQ(second_derivative_mass(FluxFunction::power(2.0), Interval(0, 1)), 3.0);
  EXPECT_DOUBLE_EQ(second_derivative_mass(FluxFunction::power(2.0), Interval(-1, 2)), 15.0);
  EXPECT_THROW(second_derivative_mass(FluxFunction::burgers(Interval(-1, 1)), Interval(0, 2)), DomainError);
}

TEST(SecondDerivativeMass, AdditiveAndPositive) {
  for (auto& [name, flux] : entrolab::testing::flux_zoo()) {
    SplitMix64 rng(5);
    for (int k = 0; k < 200; ++k) {
      double c = rng.uniform(-4, 4), e = rng.uniform(-4, 4);
      if (c > e) std::swap(c, e);
      const double d = rng.uniform(c, e);
      const double whole = second_derivative_mass(flux, Interval(c, e));
      const double parts = second_derivative_mass(flux, Interval(c, d)) + second_derivative_mass(flux, Interval(d, e));
      EXPECT_NEAR(whole, parts, 1e-12 * (1 + std::abs(whole))) << name;
      if (c < e) {
        EXPECT_GT(whole, 0.0) << name;
      }
    }
    EXPECT_EQ(second_derivative_mass(flux, Interval(1, 1)), 0.0);
  }
}

TEST(SonicPoint, KnownValues) {
  EXPECT_EQ(sonic_point(FluxFunction::burgers(), Interval(-1, 1)), 0.0);
  EXPECT_EQ(sonic_point(FluxFunction::burgers(), Interval(0.5, 1)), 0.5);
  EXPECT_EQ(sonic_point(FluxFunction::power(2.0), Interval(-2, 1)), 0.0);
  EXPECT_EQ(sonic_point(FluxFunction::exponential(), Interval(-1, 1)), -1.0);
  EXPECT_EQ(sonic_point(FluxFunction::burgers(), Interval(-3, -1)), -1.0);
}

TEST(SonicPoint, PolynomialRootByBisection) {
  // a' = 2v + 1 vanishes at -1/2
  const auto flux = FluxFunction::polynomial({0.0, 1.0, 1.0});
  EXPECT_NEAR(sonic_point(flux, Interval(-2, 2)), -0.5, 1e-14);
}

TEST(Doubling, KnownValues) {
  EXPECT_EQ(doubling_constant(FluxFunction::burgers(), Interval(-2, 2)).constant, 2.0);
  EXPECT_EQ(doubling_constant(FluxFunction::burgers(), Interval(1, 3)).constant, 2.0);
  EXPECT_EQ(doubling_constant(FluxFunction::power(1.0), Interval(-2, 2)).constant, 2.0);
  const auto est = doubling_constant(FluxFunction::power(2.0), Interval(-2, 2));
  EXPECT_DOUBLE_EQ(est.constant, 4.0);
  EXPECT_GT(est.samples, 1000);
  EXPECT_DOUBLE_EQ(est.max_radius, 2.0);
}

TEST(Doubling, BruteForceSamplingOracle) {
  // Dense brute-force scan of centres and radii: the estimator never exceeds it
  // and the power-2 maximum 4 sits at the centre 0.
  const auto flux = FluxFunction::power(2.0);
  double brute = 1.0;
  for (int i = 0; i <= 400; ++i) {
    const double x = -2.0 + 4.0 * i / 400.0;
    for (int j = 1; j <= 200; ++j) {
      const double r = 2.0 * j / 200.0;
      if (std::abs(x) + 2 * r > 10) continue;
      const double ratio = second_derivative_mass(flux, Interval(x - 2 * r, x + 2 * r)) /
                           second_derivative_mass(flux, Interval(x - r, x + r));
      brute = std::max(brute, ratio);
    }
  }
  EXPECT_NEAR(brute, 4.0, 1e-12);
  EXPECT_LE(doubling_constant(flux, Interval(-2, 2)).constant, brute + 1e-12);
}

TEST(Doubling, PowerApproachesTwoToBetaFromBelow) {
  for (double beta : {1.5, 2.5, 3.0}) {
    const auto flux = FluxFunction::power(beta);
    const double coarse = doubling_constant(flux, Interval(-2, 2), 9, 4).constant;
    const double fine = doubling_constant(flux, Interval(-2, 2), 129, 20).constant;
    EXPECT_LE(coarse, fine + 1e-12);
    EXPECT_LE(fine, std::pow(2.0, beta) + 1e-9);
    EXPECT_NEAR(fine, std::pow(2.0, beta), 1e-9);
  }
}

TEST(TableFlux, MonotoneInterpolationReproducesBurgers) {
  std::vector<double> nodes, slopes;
  for (int i = 0; i <= 40; ++i) {
    nodes.push_back(-2.0 + 0.1 * i);
    slopes.push_back(nodes.back());
  }
  const auto flux = FluxFunction::table(nodes, slopes);
  EXPECT_EQ(flux.family(), FluxFamily::table);
  SplitMix64 rng(9);
  for (int k = 0; k < 100; ++k) {
    const double v = rng.uniform(-2, 2);
    EXPECT_NEAR(flux.a_prime(v), v, 1e-12);
    EXPECT_NEAR(flux.a(v), 0.5 * v * v - 2.0, 1e-12);
  }
}

TEST(TableFlux, StaysStrictlyConvexForCurvedData) {
  std::vector<double> nodes, slopes;
  for (int i = 0; i <= 20; ++i) {
    nodes.push_back(-1.0 + 0.1 * i);
    slopes.push_back(std::sinh(3 * nodes.back()));
  }
  const auto flux = FluxFunction::table(nodes, slopes);
  for (double v : linspace(-1, 1, 2001)) {
    const double h = 1e-6;
    if (v + h <= 1) {
      EXPECT_GT(flux.a_prime(v + h), flux.a_prime(v));
    }
  }
  EXPECT_THROW(FluxFunction::table({0, 1, 2}, {0, 1, 1}), DomainError);
}
