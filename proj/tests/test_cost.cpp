#include "envmpc/cost/cost_terms.hpp"
#include "envmpc/cost/cost_to_go.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace envmpc;

namespace {

CostWeights unit_weights() {
  CostWeights w;
  w.w_delta_f = w.w_ax = w.w_v = w.w_kappa = w.w_delta_f_rate = w.w_jx = 1.0;
  return w;
}

geometry::ArcPath arc_centerline(double radius, double length, double ds) {
  std::vector<geometry::Point> pts;
  const int n = static_cast<int>(length / ds);
  for (int i = 0; i <= n; ++i) {
    const double th = i * ds / radius;
    pts.emplace_back(radius * std::sin(th), radius * (1.0 - std::cos(th)));
  }
  return geometry::ArcPath(pts);
}

}  // namespace

TEST(StageCost, ZeroAtRest) {
  VehicleState s;
  s.ux = 20.0;
  EXPECT_EQ(stage_cost(s, ControlInput{}, unit_weights()), 0.0);
}

TEST(StageCost, HandEvaluation) {
  VehicleState s;
  s.delta_f = 0.1;
  s.ax = 1.0;
  s.v = 0.2;
  s.r = 0.5;
  s.ux = 10.0;
  const ControlInput u{0.05, 2.0};
  EXPECT_NEAR(stage_cost(s, u, unit_weights()), 5.055, 1e-12);
  const CostBreakdown b = stage_cost_parts(s, u, unit_weights());
  EXPECT_NEAR(b.state, 0.01 + 1.0 + 0.04 + 0.0025, 1e-12);
  EXPECT_NEAR(b.control, 0.0025 + 4.0, 1e-12);
}

TEST(StageCost, LinearInWeights) {
  VehicleState s;
  s.delta_f = 0.03;
  s.ax = -2.0;
  s.v = 0.4;
  s.r = 0.2;
  s.ux = 15.0;
  const ControlInput u{0.2, -5.0};
  CostWeights w;
  CostWeights w2 = w;
  w2.w_delta_f *= 2;
  w2.w_ax *= 2;
  w2.w_v *= 2;
  w2.w_kappa *= 2;
  w2.w_delta_f_rate *= 2;
  w2.w_jx *= 2;
  EXPECT_NEAR(stage_cost(s, u, w2), 2.0 * stage_cost(s, u, w), 1e-12);
}

TEST(StageCost, DomainErrorAtSpeedFloor) {
  VehicleState s;
  s.ux = 0.05;
  EXPECT_THROW(stage_cost(s, ControlInput{}, CostWeights{}), DomainError);
}

TEST(EnvelopeCost, InteriorAlmostZero) {
  EXPECT_NEAR(envelope_cost(-1.0, 1.0, 20.0, 0.0), 2.0611536e-9, 1e-15);
  EXPECT_NEAR(envelope_cost(-1.0, 7.0, 20.0, 0.0), 7.0 * std::log1p(std::exp(-20.0)), 1e-22);
}

TEST(EnvelopeCost, BoundaryIsLogTwo) {
  EXPECT_NEAR(envelope_cost(0.0, 3.0, 20.0, 0.0), 3.0 * std::log(2.0), 1e-15);
  EXPECT_NEAR(envelope_cost(-0.1, 3.0, 20.0, 0.1), 3.0 * std::log(2.0), 1e-15);
}

TEST(EnvelopeCost, LinearFarOutside) {
  const double h = 1e-4;
  for (double g : {1.0, 3.0, 10.0}) {
    const double slope = (envelope_cost(g + h, 2.0, 20.0, 0.0) - envelope_cost(g - h, 2.0, 20.0, 0.0)) / (2 * h);
    EXPECT_NEAR(slope, 2.0 * 20.0, 1e-6);
  }
}

TEST(EnvelopeCost, MonotoneAlongOutwardRays) {
  const std::vector<EnvelopeBlock> blocks{{10.0, 0.0, 0.0, 10.0, 3.0, 4}, {26.0, 1.0, 0.1, 10.0, 3.0, 4}};
  const SpatialEnvelope env = SpatialEnvelope::finalize(blocks);
  const CostWeights w;
  for (int k = 0; k < 100; ++k) {
    const double th = 2 * std::numbers::pi * k / 100;
    const geometry::Point c(18.0, 0.5);
    const geometry::Point d(std::cos(th), std::sin(th));
    double t = 0.0;
    while (env.exact_membership(c.x() + t * d.x(), c.y() + t * d.y()) <= 0.0) t += 0.05;
    double prev = envelope_cost(c.x() + t * d.x(), c.y() + t * d.y(), env, w);
    for (double step = 0.1; step < 30.0; step += 0.1) {
      const double cur = envelope_cost(c.x() + (t + step) * d.x(), c.y() + (t + step) * d.y(), env, w);
      EXPECT_GE(cur, prev - 1e-12);
      prev = cur;
    }
  }
}

TEST(SpeedCost, Examples) {
  EXPECT_EQ(speed_cost(20.0, 20.0, 1.0), 0.0);
  EXPECT_EQ(speed_cost(35.0, 20.0, 1.0), 225.0);
  EXPECT_EQ(speed_cost(23.5, 20.0, 2.0), speed_cost(16.5, 20.0, 2.0));
}

TEST(TerminalCost, Examples) {
  EXPECT_EQ(terminal_cost_offroad(0.0, 100.0, 100.0), 0.0);
  EXPECT_EQ(terminal_cost_offroad(12.0, 12.0, 100.0), 1.0);
  EXPECT_NEAR(terminal_cost_offroad(0.0, 40.0, 100.0), 0.6, 1e-15);
  EXPECT_EQ(terminal_cost_offroad(100.0, 120.0, 100.0), 0.0);
}

TEST(CostToGoPoly, TrivialCoefficients) {
  CubicCoeffs w{};
  EXPECT_EQ(eval_cost_to_go(3.0, -2.0, w), 0.0);
  w[0] = 5.0;
  EXPECT_EQ(eval_cost_to_go(3.0, -2.0, w), 5.0);
  EXPECT_EQ(eval_cost_to_go(-100.0, 7.0, w), 5.0);
}

TEST(CostToGoPoly, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int t = 0; t < 200; ++t) {
    CubicCoeffs w;
    for (double& c : w) c = U(rng);
    const double x = U(rng), y = U(rng), h = 1e-6;
    const auto g = eval_cost_to_go(Dual<2>::variable(x, 0), Dual<2>::variable(y, 1), w);
    const double gx = (eval_cost_to_go(x + h, y, w) - eval_cost_to_go(x - h, y, w)) / (2 * h);
    const double gy = (eval_cost_to_go(x, y + h, w) - eval_cost_to_go(x, y - h, w)) / (2 * h);
    EXPECT_NEAR(g.d[0], gx, 1e-6 * std::max(1.0, std::abs(gx)));
    EXPECT_NEAR(g.d[1], gy, 1e-6 * std::max(1.0, std::abs(gy)));
  }
}

TEST(CostToGoFit, LabelsAreLaterallyInvariant) {
  const geometry::ArcPath c = arc_centerline(120.0, 400.0, 2.0);
  const std::vector<double> hw(c.size(), 6.0);
  const auto samples = cost_to_go_samples(c, hw, 10.0, 30.0, 6.75);
  ASSERT_EQ(samples.size() % 15, 0u);
  for (std::size_t k = 0; k < samples.size(); k += 15) {
    for (int l = 1; l < 15; ++l) EXPECT_EQ(samples[k + l].label, samples[k].label);
    // the middle sample is the centerline point itself
    EXPECT_LT((samples[k + 7].p - c.point_at(samples[k].s)).norm(), 1e-9);
  }
  EXPECT_NEAR(samples.front().label, 30.0 * 6.75, 1e-12);
  EXPECT_NEAR(samples.back().label, 0.0, 1e-9);
}

TEST(CostToGoFit, EndpointsAndLateralFlatness) {
  const geometry::ArcPath c = arc_centerline(150.0, 400.0, 2.0);
  const std::vector<double> hw(c.size(), 6.0);
  const double s0 = 20.0, ux = 30.0, Tp = 6.75;
  const CostToGo fit = fit_cost_to_go(c, hw, s0, ux, Tp);
  EXPECT_GT(fit.rms, 0.0);
  EXPECT_LT(fit.rms, 0.05 * ux * Tp);
  const auto p0 = c.point_at(s0);
  const auto pf = c.point_at(s0 + ux * Tp);
  EXPECT_NEAR(fit(p0.x(), p0.y()), ux * Tp, 3.0 * fit.rms);
  EXPECT_NEAR(fit(pf.x(), pf.y()), 0.0, 3.0 * fit.rms);
  const auto samples = cost_to_go_samples(c, hw, s0, ux, Tp);
  double spread2 = 0.0;
  for (std::size_t k = 0; k < samples.size(); k += 15) {
    const double mid = fit(samples[k + 7].p.x(), samples[k + 7].p.y());
    for (int l = 0; l < 15; ++l) {
      const double d = fit(samples[k + l].p.x(), samples[k + l].p.y()) - mid;
      EXPECT_LE(std::abs(d), 2.0 * fit.max_residual + 1e-9);
      spread2 += d * d;
    }
  }
  EXPECT_LE(std::sqrt(spread2 / static_cast<double>(samples.size())), 2.0 * fit.rms);
}

TEST(CostToGoFit, GlobalCoefficientsReproduceLocalFit) {
  const geometry::ArcPath c = arc_centerline(80.0, 300.0, 2.0);
  std::vector<geometry::Point> shifted;
  for (const auto& p : c.points()) shifted.emplace_back(p.x() + 350.0, p.y() - 120.0);
  const geometry::ArcPath cs(shifted);
  const std::vector<double> hw(cs.size(), 5.0);
  const CostToGo fit = fit_cost_to_go(cs, hw, 15.0, 25.0, 6.75);
  const CubicCoeffs g = fit.global();
  for (const auto& p : cs.points()) {
    const double loc = fit(p.x(), p.y());
    EXPECT_NEAR(eval_cost_to_go(p.x(), p.y(), g), loc, 1e-6 * std::max(1.0, std::abs(loc)));
  }
}

TEST(CostToGoFit, DegenerateGeometryIsReported) {
  const geometry::ArcPath c(std::vector<geometry::Point>{{0.0, 0.0}, {500.0, 0.0}});
  const std::vector<double> zero(2, 0.0);
  EXPECT_THROW(fit_cost_to_go(c, zero, 0.0, 30.0, 6.75), CostToGoError);
  const std::vector<double> hw(2, 4.0);
  EXPECT_THROW(fit_cost_to_go(c, hw, 400.0, 30.0, 6.75), std::invalid_argument);
}
