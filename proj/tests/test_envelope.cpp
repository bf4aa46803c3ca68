#include "envmpc/envelope/bounds.hpp"
#include "envmpc/envelope/envelope_io.hpp"
#include "envmpc/envelope/spatial_envelope.hpp"
#include "envmpc/vehicle/tire.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace envmpc;

namespace {

std::vector<EnvelopeBlock> straight_corridor() {
  return {{10.0, 0.0, 0.0, 10.0, 2.0, 4}, {26.0, 0.0, 0.0, 10.0, 2.0, 4}, {42.0, 0.0, 0.0, 10.0, 2.0, 4}};
}

std::vector<EnvelopeBlock> bent_corridor() {
  return {{10.0, 0.0, 0.0, 11.0, 3.0, 4}, {27.0, 3.0, 0.35, 10.0, 3.0, 4}, {42.0, 10.0, 0.6, 9.0, 2.5, 4}};
}

}  // namespace

TEST(BlockDistance, Examples) {
  const EnvelopeBlock b{0.0, 0.0, 0.0, 10.0, 2.0, 4};
  EXPECT_EQ(block_distance(0.0, 0.0, b), -1.0);
  EXPECT_NEAR(block_distance(10.0, 0.0, b), 0.0, 1e-15);
  EXPECT_NEAR(block_distance(5.0, 1.0, b), std::pow(2 * std::pow(0.5, 4), 0.25) - 1.0, 1e-15);
  EXPECT_NEAR(block_distance(5.0, 1.0, b), -0.40540, 1e-5);
}

TEST(BlockDistance, RotationInvariant) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-20.0, 20.0);
  const EnvelopeBlock b{3.0, -2.0, 0.4, 7.0, 2.5, 4};
  for (int i = 0; i < 200; ++i) {
    const double x = U(rng), y = U(rng), th = U(rng);
    const double c = std::cos(th), s = std::sin(th);
    EnvelopeBlock rb = b;
    rb.xb = c * b.xb - s * b.yb;
    rb.yb = s * b.xb + c * b.yb;
    rb.psib = b.psib + th;
    const double g = block_distance(x, y, b);
    EXPECT_NEAR(block_distance(c * x - s * y, s * x + c * y, rb), g, 1e-12 * std::max(1.0, std::abs(g)));
  }
}

TEST(BlockDistance, BoundaryPointsHaveZeroDistance) {
  const EnvelopeBlock b{1.0, 2.0, 0.7, 5.0, 1.5, 4};
  for (int i = 0; i < 64; ++i) {
    const auto q = b.boundary_point(i * 2 * std::numbers::pi / 64);
    EXPECT_NEAR(block_distance(q.x(), q.y(), b), 0.0, 1e-12);
  }
}

TEST(ExactMembership, MinOverBlocks) {
  const SpatialEnvelope env(straight_corridor(), kDefaultRhoLse, 0.0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> X(-5.0, 60.0), Y(-5.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = X(rng), y = Y(rng);
    double brute = 1e300;
    for (const auto& b : env.blocks()) brute = std::min(brute, block_distance(x, y, b));
    EXPECT_NEAR(env.exact_membership(x, y), brute, 1e-15);
  }
}

TEST(Lse, SingleValueIsExact) {
  for (double rho : {-50.0, -15.0, -5.0, 5.0}) {
    EXPECT_EQ(lse_aggregate(std::vector<double>{-0.7}, rho), -0.7);
  }
}

TEST(Lse, TwoZerosAtMinusTen) {
  EXPECT_NEAR(lse_aggregate(std::vector<double>{0.0, 0.0}, -10.0), -std::log(2.0) / 10.0, 1e-15);
  EXPECT_NEAR(lse_aggregate(std::vector<double>{0.0, 0.0}, -10.0), -0.069315, 1e-6);
}

TEST(Lse, OverflowSafe) {
  const double g = lse_aggregate(std::vector<double>{400.0, 500.0, 1000.0}, -50.0);
  EXPECT_TRUE(std::isfinite(g));
  EXPECT_NEAR(g, 400.0, 1e-12);
}

TEST(Lse, RejectsBadInput) {
  EXPECT_THROW(lse_aggregate(std::vector<double>{}, -5.0), std::invalid_argument);
  EXPECT_THROW(lse_aggregate(std::vector<double>{1.0}, 0.0), std::invalid_argument);
}

TEST(Lse, SandwichProperty) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> G(-3.0, 3.0);
  std::uniform_int_distribution<int> N(2, 12);
  for (double rho : {-50.0, -15.0, -5.0, 5.0, 15.0, 50.0}) {
    for (int t = 0; t < 500; ++t) {
      std::vector<double> g(N(rng));
      for (double& v : g) v = G(rng);
      const double lse = lse_aggregate(g, rho);
      const double n = static_cast<double>(g.size());
      if (rho < 0) {
        const double gmin = *std::min_element(g.begin(), g.end());
        EXPECT_GE(lse, gmin + std::log(n) / rho - 1e-12);
        EXPECT_LE(lse, gmin);
        std::vector<double> sorted = g;
        std::sort(sorted.begin(), sorted.end());
        if (std::exp(rho * (sorted[1] - sorted[0])) > 1e-10) {
          EXPECT_LT(lse, gmin);
        }
      } else {
        const double gmax = *std::max_element(g.begin(), g.end());
        EXPECT_GE(lse, gmax);
        std::vector<double> sorted = g;
        std::sort(sorted.rbegin(), sorted.rend());
        if (std::exp(-rho * (sorted[0] - sorted[1])) > 1e-10) {
          EXPECT_GT(lse, gmax);
        }
        EXPECT_LE(lse, gmax + std::log(n) / rho + 1e-12);
      }
    }
  }
}

TEST(Epsilon0, ZeroWhenAlreadyConservative) {
  const std::vector<EnvelopeBlock> one{{0.0, 0.0, 0.0, 5.0, 2.0, 4}};
  const SpatialEnvelope env = SpatialEnvelope::finalize(one);
  EXPECT_NEAR(env.epsilon0(), 0.0, 1e-12);
}

TEST(Epsilon0, StraightCorridorMatchesBoundaryScan) {
  const auto blocks = straight_corridor();
  const SpatialEnvelope env = SpatialEnvelope::finalize(blocks, kDefaultRhoLse, 0.1);
  EXPECT_LT(env.epsilon0(), 0.0);
  double scan = 0.0;
  for (const auto& q : env.boundary_samples()) {
    if (env.exact_membership(q.x(), q.y()) >= -1e-12) {
      scan = std::min(scan, env.lse(q.x(), q.y()));
    }
  }
  EXPECT_EQ(env.epsilon0(), scan);
  EXPECT_THROW(compute_epsilon0(blocks, kDefaultRhoLse, {}), std::invalid_argument);
}

TEST(Epsilon0, MinimizingSampleHasZeroConstraint) {
  const SpatialEnvelope env = SpatialEnvelope::finalize(straight_corridor());
  double best = 1e300;
  for (const auto& q : env.boundary_samples()) {
    if (env.exact_membership(q.x(), q.y()) >= -1e-12) best = std::min(best, env.constraint(q.x(), q.y()));
  }
  EXPECT_EQ(best, 0.0);
}

class Conservativeness : public ::testing::TestWithParam<double> {};

TEST_P(Conservativeness, NoFalseFeasiblePoints) {
  for (const auto& blocks : {straight_corridor(), bent_corridor()}) {
    const SpatialEnvelope env = SpatialEnvelope::finalize(blocks, GetParam());
    geometry::Box box = env.bounding_box();
    box.pad(1.0);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> X(box.lo.x(), box.hi.x()), Y(box.lo.y(), box.hi.y());
    int bad = 0;
    int feasible = 0;
    for (int i = 0; i < 20000; ++i) {
      const double x = X(rng), y = Y(rng);
      if (env.constraint(x, y) < 0.0) {
        ++feasible;
        if (env.exact_membership(x, y) > 0.0) ++bad;
      }
    }
    EXPECT_EQ(bad, 0);
    EXPECT_GT(feasible, 0);
  }
}

INSTANTIATE_TEST_SUITE_P(RhoSweep, Conservativeness, ::testing::Values(-5.0, -15.0, -50.0));

TEST(EnvelopeConstraint, InteriorNegativeAndGradientMatches) {
  const SpatialEnvelope env = SpatialEnvelope::finalize(bent_corridor());
  EXPECT_LT(env.constraint(10.0, 0.0), 0.0);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> X(-2.0, 50.0), Y(-4.0, 14.0);
  for (int i = 0; i < 300; ++i) {
    const double x = X(rng), y = Y(rng), h = 1e-6;
    const auto [g, grad] = env.constraint_gradient(x, y);
    EXPECT_DOUBLE_EQ(g, env.constraint(x, y));
    const double gx = (env.constraint(x + h, y) - env.constraint(x - h, y)) / (2 * h);
    const double gy = (env.constraint(x, y + h) - env.constraint(x, y - h)) / (2 * h);
    EXPECT_NEAR(grad.x(), gx, 1e-5 * std::max(1.0, std::abs(gx)));
    EXPECT_NEAR(grad.y(), gy, 1e-5 * std::max(1.0, std::abs(gy)));
  }
}

TEST(EnvelopeConstraint, LocalViewIsNoLessConservative) {
  const SpatialEnvelope env = SpatialEnvelope::finalize(bent_corridor());
  const SpatialEnvelope view = env.local_view({12.0, 1.0}, 5.0);
  EXPECT_LT(view.blocks().size(), env.blocks().size());
  EXPECT_EQ(view.epsilon0(), env.epsilon0());
  for (double x = 0.0; x < 30.0; x += 0.7) {
    for (double y = -4.0; y < 8.0; y += 0.9) {
      EXPECT_GE(view.constraint(x, y), env.constraint(x, y) - 1e-15);
    }
  }
}

TEST(EnvelopeConstraint, ConnectivityCheck) {
  const SpatialEnvelope env(straight_corridor(), kDefaultRhoLse, 0.0);
  EXPECT_FALSE(env.first_disconnected_pair().has_value());
  auto gap = straight_corridor();
  gap[2].xb = 70.0;
  const SpatialEnvelope env2(gap, kDefaultRhoLse, 0.0);
  ASSERT_TRUE(env2.first_disconnected_pair().has_value());
  EXPECT_EQ(*env2.first_disconnected_pair(), 1u);
}

TEST(EnvelopeIo, RoundTripIsBitExact) {
  const SpatialEnvelope env = SpatialEnvelope::finalize(bent_corridor());
  const SpatialEnvelope back = envelope_from_string(envelope_to_string(env));
  ASSERT_EQ(back.blocks().size(), env.blocks().size());
  EXPECT_EQ(back.epsilon0(), env.epsilon0());
  EXPECT_EQ(back.rho(), env.rho());
  for (std::size_t i = 0; i < env.blocks().size(); ++i) {
    EXPECT_EQ(back.blocks()[i].xb, env.blocks()[i].xb);
    EXPECT_EQ(back.blocks()[i].psib, env.blocks()[i].psib);
    EXPECT_EQ(back.blocks()[i].Wb, env.blocks()[i].Wb);
  }
  EXPECT_EQ(envelope_to_string(back), envelope_to_string(env));
  EXPECT_THROW(envelope_from_string("garbage"), ConfigError);
}

TEST(FrictionBounds, HandDerivedValues) {
  VehicleParams p;
  p.mu_f = 1.0;
  p.mu_r = 1.0;
  const AccelBounds b = friction_ax_bounds(p);
  // M g Lf/L / (M - Kz) and -M g Lf/L / (M (1 - b_r) + Kz)
  EXPECT_NEAR(b.ax_max, 9810.0 / (2000.0 - 1000.0 / 3.0), 1e-9);
  EXPECT_NEAR(b.ax_min, -9810.0 / (800.0 + 1000.0 / 3.0), 1e-9);
  EXPECT_NEAR(b.ax_max, 5.886, 5e-4);
  EXPECT_NEAR(b.ax_min, -8.656, 5e-4);
}

TEST(FrictionBounds, NoTransferLimit) {
  VehicleParams p;
  p.h = 1e-12;
  const AccelBounds b = friction_ax_bounds(p);
  EXPECT_NEAR(b.ax_max, p.mu_r * p.g * p.Lf / p.wheelbase(), 1e-9);
  const double flat = -std::min(p.mu_r * p.g * p.Lf / ((1 - p.b_r) * p.wheelbase()),
                                p.mu_f * p.g * p.Lr / (p.b_r * p.wheelbase()));
  EXPECT_NEAR(b.ax_min, flat, 1e-9);
}

TEST(FrictionBounds, SampledDemandsWithinCircle) {
  const VehicleParams p;
  const AccelBounds b = friction_ax_bounds(p);
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> A(b.ax_min, b.ax_max);
  for (int i = 0; i <= 1000; ++i) {
    const double ax = i == 0 ? b.ax_min : (i == 1 ? b.ax_max : A(rng));
    const double Fx = p.M * ax;
    const double fxf = Fx < 0 ? p.b_r * Fx : 0.0;
    const double fxr = Fx - fxf;
    const auto fz = load_transfer(p, ax);
    EXPECT_LE(std::abs(fxf), p.mu_f * fz.front + 1e-9);
    EXPECT_LE(std::abs(fxr), p.mu_r * fz.rear + 1e-9);
  }
}

TEST(FrictionBounds, DegenerateDenominatorRejected) {
  VehicleParams p;
  p.b_r = 0.05;
  p.h = 3.0;
  EXPECT_THROW(friction_ax_bounds(p), ConfigError);
}

TEST(PowerLimit, Examples) {
  EXPECT_EQ(power_limit_residual(60.0, 0.0, 0.08, 60.0), 0.0);
  EXPECT_NEAR(power_limit_residual(0.0, 0.08 * 60.0, 0.08, 60.0), 0.0, 1e-15);
  EXPECT_NEAR(power_limit_residual(30.0, 2.0, 0.08, 60.0), -0.4, 1e-15);
}

TEST(LinearBounds, ConfigCanOnlyTightenAx) {
  LinearBounds b = LinearBounds::for_vehicle(VehicleParams{});
  const double ax_max = b.ax_max;
  b.apply_config(KeyValueConfig::parse("bound.ax_max = 50\nbound.v_max = 3\n"));
  EXPECT_EQ(b.ax_max, ax_max);
  EXPECT_EQ(b.v_max, 3.0);
  EXPECT_THROW(b.apply_config(KeyValueConfig::parse("bound.r_min = 9\n")), ConfigError);
}
