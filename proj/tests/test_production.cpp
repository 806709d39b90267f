#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "entrolab/production.hpp"
#include "test_support.hpp"

using namespace entrolab;

namespace {

GridSpec grid(double t0, double t1, int nt, double x0, double x1, int nx) {
  GridSpec g;
  g.t0 = t0, g.t1 = t1, g.nt = nt, g.x0 = x0, g.x1 = x1, g.nx = nx;
  return g;
}

const FluxFunction burgers = FluxFunction::burgers();
const CostEvaluator burgers_ce{burgers};
const Entropy quadratic = Entropy::quadratic();

}  // namespace

TEST(MollifierTest, StencilsAreNormalised) {
  for (double ratio : {4.0, 7.5, 16.0, 64.0}) {
    const Mollifier mol(ratio * 0.01, 0.01);
    double mass = 0.0, moment = 0.0, odd = 0.0;
    for (int k = -mol.half_width(); k <= mol.half_width(); ++k) {
      mass += mol.weight(k) * 0.01;
      moment -= mol.slope_weight(k) * k * 0.01 * 0.01;
      odd += mol.weight(k) * k;
      EXPECT_EQ(mol.weight(k), mol.weight(-k));
      EXPECT_EQ(mol.slope_weight(k), -mol.slope_weight(-k));
    }
    EXPECT_NEAR(mass, 1.0, 1e-14);
    EXPECT_NEAR(moment, 1.0, 1e-14);
    EXPECT_NEAR(odd, 0.0, 1e-10);
  }
  EXPECT_THROW(Mollifier(0.03, 0.01), ConfigError);
}

TEST(MollifierTest, KernelHasUnitMass) {
  const double m = integrate([](double y) { return Mollifier::rho(y); }, Interval(-1, 1));
  EXPECT_NEAR(m, 1.0, 1e-13);
}

TEST(Commutator, VanishesOnConstantData) {
  const auto g = grid(0, 1, 10, -1, 1, 200);
  const auto f = godunov_solve(burgers, [](double) { return -0.4; }, g);
  const auto rep = commutator(f, burgers, 0.05);
  EXPECT_NEAR(rep.min, 0.0, 1e-15);
  EXPECT_NEAR(rep.max, 0.0, 1e-15);
}

TEST(Commutator, BurgersOnLinearProfileIsHalfTheStencilVariance) {
  // u = x: u_eps = x, so [u^2/2]_eps - u_eps^2/2 = (1/2) sum w_k (k dx)^2 dx
  const auto g = grid(0, 1, 4, -1, 1, 400);
  std::vector<double> values;
  for (int i = 0; i < g.nt; ++i) {
    for (int j = 0; j < g.nx; ++j) values.push_back(g.x_centre(j));
  }
  const SpaceTimeField f(g, values, Provenance::analytic);
  const double eps = 16 * g.dx();
  const Mollifier mol(eps, g.dx());
  double var = 0.0;
  for (int k = -mol.half_width(); k <= mol.half_width(); ++k) var += mol.weight(k) * k * k * g.dx() * g.dx() * g.dx();
  const auto rep = commutator(f, burgers, eps);
  EXPECT_NEAR(rep.min, 0.5 * var, 1e-14);
  EXPECT_NEAR(rep.max, 0.5 * var, 1e-14);
}

TEST(Commutator, NonnegativeAndBelowMajorantOnRandomFields) {
  const auto g = grid(0, 0.5, 8, -1, 1, 400);
  for (auto& [name, flux] : entrolab::testing::flux_zoo()) {
    const auto f = godunov_solve(flux, [](double x) { return x < 0.1 ? 0.9 : -0.6 + 0.3 * std::sin(9 * x); }, g);
    for (double eps : default_ladder(g.dx(), 4)) {
      CommutatorReport rep;
      ASSERT_NO_THROW(rep = commutator(f, flux, eps)) << name;
      EXPECT_GE(rep.min, rep.floor) << name;
      EXPECT_LE(rep.max_majorant_excess, 0.0) << name;
      EXPECT_GT(rep.majorant_samples, 0) << name;
    }
  }
}

TEST(Pairing, ShockApproachesJumpPairing) {
  // <mu_eta, psi> for the stationary shock 1 | -1 and eta = v^2/2 is
  // c_eta nu_x int psi(t, 0) dt = -(2/3) int psi(t, 0) dt
  const auto g = grid(0, 1, 100, -1.5, 1.5, 4000);
  const auto f = rh_jump_field(burgers, 1.0, -1.0, g);
  const TestFunction psi(0.5, 0.0, 0.4, 0.5);
  const double want = -2.0 / 3.0 * psi.time_integral_at(0.0);
  EXPECT_NEAR(jump_pairing(f.jumps(), quadratic, burgers, psi), want, 1e-12);
  const auto rep = production_study(f, burgers, quadratic, psi, default_ladder(g.dx()));
  EXPECT_LE(std::abs(rep.total.front() - want), 0.05 * std::abs(want));
  EXPECT_GE(rep.term1_order, 0.8);
  EXPECT_GE(rep.jensen_min, -1e-10);
  for (std::size_t k = 0; k < rep.total.size(); ++k) EXPECT_LE(std::abs(rep.total[k]), rep.bound[k] * (1 + 1e-12));
}

TEST(Pairing, NonentropicJumpFlipsSign) {
  const auto g = grid(0, 1, 50, -1.5, 1.5, 2000);
  const TestFunction psi(0.5, 0.0, 0.4, 0.5);
  const auto up = nonentropic_jump_field(burgers, -1.0, 1.0, g);
  const auto down = rh_jump_field(burgers, 1.0, -1.0, g);
  const double eps = 8 * g.dx();
  EXPECT_NEAR(pairing(up, burgers, quadratic, psi, eps).total, -pairing(down, burgers, quadratic, psi, eps).total,
              1e-12);
  EXPECT_NEAR(jump_pairing(up.jumps(), quadratic, burgers, psi), 2.0 / 3.0 * psi.time_integral_at(0.0), 1e-12);
}

TEST(Pairing, LinearInTheEntropy) {
  const auto g = grid(0, 1, 40, -1.5, 1.5, 800);
  const auto f = godunov_solve(burgers, [](double x) { return x < 0 ? 1.0 : -0.5; }, g);
  const TestFunction psi(0.5, 0.2, 0.4, 0.5);
  const double eps = 8 * g.dx();
  const auto e1 = Entropy::polynomial({0, 0, 0.5});
  const auto e2 = Entropy::polynomial({0, 0, 0, 0, 1});
  const auto e12 = Entropy::polynomial({0, 0, 1.0, 0, 3});  // 2 e1 + 3 e2
  const double p1 = pairing(f, burgers, e1, psi, eps).total, p2 = pairing(f, burgers, e2, psi, eps).total;
  EXPECT_NEAR(pairing(f, burgers, e12, psi, eps).total, 2 * p1 + 3 * p2, 1e-12 * (1 + std::abs(p1) + std::abs(p2)));
}

TEST(Pairing, AffineEntropyProducesNothing) {
  const auto g = grid(0, 1, 40, -1.5, 1.5, 800);
  const auto f = rh_jump_field(burgers, 1.0, -1.0, g);
  const TestFunction psi(0.5, 0.0, 0.4, 0.5);
  const auto r = pairing(f, burgers, Entropy::polynomial({1.0, 2.0}), psi, 8 * g.dx());
  EXPECT_NEAR(r.total, 0.0, 1e-15);
}

TEST(Pairing, SupportMustStayInside) {
  const auto g = grid(0, 1, 10, -1, 1, 200);
  const auto f = rh_jump_field(burgers, 1.0, -1.0, g);
  EXPECT_THROW(pairing(f, burgers, quadratic, TestFunction(0.5, 0.0, 0.6, 0.5), 0.04), DomainError);
  EXPECT_THROW(pairing(f, burgers, quadratic, TestFunction(0.5, 0.0, 0.4, 0.99), 0.04), DomainError);
}

TEST(JumpProductionTest, Examples) {
  const auto g = grid(0, 1, 10, -1, 1, 20);
  const auto shock = rh_jump_field(burgers, 1.0, -1.0, g);
  const Rect U{0, 1, -1, 1};
  const auto p = jump_production(shock.jumps(), quadratic, burgers, U);
  EXPECT_NEAR(p.signed_value, -2.0 / 3.0, 1e-15);
  EXPECT_NEAR(p.abs_value, 2.0 / 3.0, 1e-15);
  // 1 | 0 moves at speed 1/2; c_eta = -1/12 per unit of nu_x * length = time span
  const auto half = rh_jump_field(burgers, 1.0, 0.0, g);
  EXPECT_NEAR(jump_production(half.jumps(), quadratic, burgers, U).signed_value, -1.0 / 12.0, 1e-15);
  EXPECT_EQ(jump_production(shock.jumps(), quadratic, burgers, Rect{0, 1, 0.5, 1}).abs_value, 0.0);
  EXPECT_NEAR(jump_production(shock.jumps(), quadratic, burgers, Rect{0.25, 0.75, -1, 1}).abs_value, 1.0 / 3.0,
              1e-15);
}

TEST(JumpProductionTest, NonRhSegmentIsRejected) {
  const auto g = grid(0, 1, 10, -1, 1, 20);
  auto f = pure_jump_field(0.0, 1.0, {0.0, 1.0}, {0.0, 0.0}, g);
  EXPECT_THROW(jump_production(f.jumps(), quadratic, burgers, Rect{0, 1, -1, 1}), InvariantViolation);
  EXPECT_NO_THROW(jump_production(f.jumps(), quadratic, burgers, Rect{0, 1, -1, 1}, false));
}

TEST(DistributionalProduction, MatchesJumpPairingOnEdgeAlignedShock) {
  const auto g = grid(0, 1, 40, -1, 1, 200);
  const auto f = rh_jump_field(burgers, 1.0, -1.0, g);
  const TestFunction psi(0.5, 0.0, 0.4, 0.5);
  const EntropyFluxTable q(quadratic, burgers);
  EXPECT_NEAR(distributional_production(f, quadratic, q, psi), jump_pairing(f.jumps(), quadratic, burgers, psi),
              1e-10);
}

TEST(Ladder, DefaultsAndOrders) {
  const auto l = default_ladder(0.01);
  ASSERT_EQ(l.size(), 5u);
  EXPECT_DOUBLE_EQ(l.front(), 0.04);
  EXPECT_DOUBLE_EQ(l.back(), 0.64);
  EXPECT_EQ(lower_half(5), 3u);
  EXPECT_EQ(lower_half(4), 2u);
  EXPECT_NEAR(empirical_order({0.1, 0.2, 0.4}, {0.01, 0.04, 0.16}, 3), 2.0, 1e-12);
  EXPECT_TRUE(std::isnan(empirical_order({0.1, 0.2}, {0.0, 0.0}, 2)));
}

TEST(ProductionRatio, StationaryShockRatioIsOneHalf) {
  const auto g = grid(0, 1, 50, -1.5, 1.5, 2000);
  const auto f = rh_jump_field(burgers, 1.0, -1.0, g);
  const auto F = gp_functional(f, burgers_ce, default_ladder(g.dx()), Window{0, 1, -1, 1, std::nullopt});
  const auto r = theorem1_from_jumps(f, quadratic, burgers_ce, F);
  EXPECT_NEAR(r.mu_abs, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.C0_empirical, 0.5, 1e-12);
  EXPECT_TRUE(r.passed());
}

TEST(ProductionRatio, ZeroOverZeroIsSkipped) {
  const auto r = theorem1_ratio(0.0, 0.0, 1.0);
  EXPECT_TRUE(r.skipped);
  EXPECT_TRUE(r.passed());
  EXPECT_TRUE(std::isinf(theorem1_ratio(1.0, 0.0, 1.0).C0_empirical));
}

TEST(CostChain, BurgersShockChain) {
  const auto g = grid(0, 1, 50, -1.5, 1.5, 2000);
  const auto f = rh_jump_field(burgers, 1.0, -1.0, g);
  const TestFunction psi(0.5, 0.0, 0.4, 0.5);
  const auto c = theorem2_chain(f, quadratic, burgers_ce, psi, default_ladder(g.dx()),
                                Window{0, 1, -1, 1, std::nullopt}, 200);
  EXPECT_EQ(c.D, 2.0);
  EXPECT_EQ(c.threshold, 144.0);
  // Delta-hat(1, -1) = 4 a''([-3, 3]) = 24 against Delta = 4/3
  EXPECT_NEAR(c.worst_functional_ratio, 18.0, 1e-9);
  EXPECT_TRUE(c.functional_ok);
  EXPECT_TRUE(c.pointwise_ok);
  EXPECT_LE(c.khat_spread, 0.1);
}

// Moving shock 1 | 0: the pairing error shrinks as eps does.
TEST(Consistency, MovingShockPairingConverges) {
  const TestFunction psi(0.5, 0.0, 0.4, 0.5);
  for (int nx : {2000, 4000}) {
    const auto g = grid(0, 1, 50, -1.5, 1.5, nx);
    const auto f = rh_jump_field(burgers, 1.0, 0.0, g);
    const auto rep = production_study(f, burgers, quadratic, psi, default_ladder(g.dx()));
    std::vector<double> err;
    for (double t : rep.total) err.push_back(std::abs(t - rep.jump_reference));
    for (std::size_t k = 1; k < lower_half(err.size()); ++k) EXPECT_LT(err[k - 1], err[k]) << nx << " " << k;
    EXPECT_GE(rep.consistency_order, 0.8) << nx;
  }
}

// The symmetric stationary shock keeps a small eps-independent floor from the
// cell-centred discretisation; it stays well under the pairing tolerance.
TEST(Consistency, StationaryShockFloorIsSmall) {
  const auto g = grid(0, 1, 50, -1.5, 1.5, 2000);
  const auto f = rh_jump_field(burgers, 1.0, -1.0, g);
  const TestFunction psi(0.5, 0.0, 0.4, 0.5);
  const auto rep = production_study(f, burgers, quadratic, psi, default_ladder(g.dx()));
  for (std::size_t k = 0; k < lower_half(rep.total.size()); ++k) {
    EXPECT_LE(std::abs(rep.total[k] - rep.jump_reference), 0.01 * std::abs(rep.jump_reference));
  }
}

TEST(GodunovSign, ConvexEntropyPairingBelowTolerance) {
  const TestFunction psi(0.5, 0.5, 0.4, 0.6);
  double prev_tol = 1e300;
  for (int nx : {250, 500, 1000}) {
    const auto g = grid(0, 1, 50, -1, 2, nx);
    const auto f = godunov_solve(burgers, [](double x) { return x < 0 ? 1.0 : 0.0; }, g);
    const double tol = godunov_sign_tolerance(f, quadratic, psi);
    EXPECT_LT(tol, prev_tol);
    prev_tol = tol;
    for (double eps : default_ladder(g.dx(), 3)) {
      EXPECT_LE(pairing(f, burgers, quadratic, psi, eps).total, tol) << nx << " " << eps;
    }
  }
}
