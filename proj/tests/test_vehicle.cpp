#include "envmpc/vehicle/dynamics.hpp"
#include "envmpc/vehicle/integrators.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace envmpc;

namespace {

VehicleState cruising(double ux) {
  VehicleState s;
  s.ux = ux;
  return s;
}

}  // namespace

TEST(LoadTransfer, StaticLoadIsSymmetric) {
  const auto fz = load_transfer(VehicleParams{}, 0.0);
  EXPECT_NEAR(fz.front, 9810.0, 1e-9);
  EXPECT_NEAR(fz.rear, 9810.0, 1e-9);
}

TEST(LoadTransfer, AcceleratingShiftsLoadRearward) {
  const VehicleParams p;
  EXPECT_NEAR(p.Kz(), 333.3333333333, 1e-9);
  const auto fz = load_transfer(p, 2.0);
  EXPECT_NEAR(fz.front, 9143.333333333, 1e-6);
  EXPECT_NEAR(fz.rear, 10476.666666667, 1e-6);
}

TEST(LoadTransfer, TotalIsConserved) {
  const VehicleParams p;
  for (double ax = -10.0; ax <= 10.0; ax += 0.37) {
    const auto fz = load_transfer(p, ax);
    EXPECT_NEAR((fz.front + fz.rear) / (p.M * p.g), 1.0, 1e-12);
  }
}

TEST(LongitudinalSplit, DriveGoesToRearAxle) {
  const VehicleParams p;
  const auto f = longitudinal_split_smooth(p, 5000.0);
  EXPECT_LT(std::abs(f.front), 1e-6 * 5000.0);
  EXPECT_NEAR(f.rear, 5000.0, 1e-6 * 5000.0);
}

TEST(LongitudinalSplit, BrakingUsesFrontShare) {
  const VehicleParams p;
  const auto f = longitudinal_split_smooth(p, -5000.0);
  EXPECT_NEAR(f.front, -3000.0, 1e-6 * 5000.0);
  EXPECT_NEAR(f.rear, -2000.0, 1e-6 * 5000.0);
  const auto z = longitudinal_split_smooth(p, 0.0);
  EXPECT_EQ(z.front, 0.0);
  EXPECT_EQ(z.rear, 0.0);
}

TEST(LongitudinalSplit, PartsSumToTotal) {
  const VehicleParams p;
  for (double fx = -9000.0; fx <= 9000.0; fx += 123.4) {
    const auto f = longitudinal_split_smooth(p, fx);
    EXPECT_DOUBLE_EQ(f.front + f.rear, fx);
  }
}

TEST(MaxLateralForce, SoftplusOvershootAtZeroDemand) {
  const double fz = 9810.0;
  const double ratio = max_lateral_force(0.0, fz, 0.9, 10.0) / (0.9 * fz);
  EXPECT_NEAR(ratio, std::sqrt(std::log1p(std::exp(10.0)) / 10.0), 1e-14);
  EXPECT_NEAR(ratio, 1.0000023, 1e-7);
}

TEST(MaxLateralForce, ExceededCircleNearlyVanishes) {
  const double fz = 9810.0;
  const double mu = 0.9;
  const double ratio = max_lateral_force(1.2 * mu * fz, fz, mu, 10.0) / (mu * fz);
  EXPECT_NEAR(ratio, std::sqrt(std::log1p(std::exp(-4.4)) / 10.0), 1e-14);
  EXPECT_NEAR(ratio, 0.0350, 1e-4);
}

TEST(MaxLateralForce, SharpLimitIsFrictionCircle) {
  const double fz = 9810.0;
  EXPECT_NEAR(max_lateral_force(0.6 * fz, fz, 1.0, 1e4) / fz, 0.8, 1e-6);
}

TEST(MaxLateralForce, BoundedByOvershoot) {
  const double fz = 8000.0;
  const double cap = std::sqrt(std::log1p(std::exp(10.0)) / 10.0);
  for (double fx = -3e4; fx <= 3e4; fx += 250.0) {
    const double m = max_lateral_force(fx, fz, 0.95, 10.0);
    EXPECT_GT(m, 0.0);
    EXPECT_LE(m, 0.95 * fz * cap * (1 + 1e-15));
  }
}

TEST(LateralForce, ZeroAndSaturation) {
  EXPECT_EQ(lateral_force(0.0, 8e4, 8000.0), 0.0);
  EXPECT_NEAR(lateral_force(50.0, 8e4, 8000.0), -8000.0, 1e-9);
  EXPECT_NEAR(lateral_force(1e-5, 8e4, 8000.0), -0.8, 0.8e-3);
}

TEST(LateralForce, OddAndSaturated) {
  for (double a = -1.0; a <= 1.0; a += 0.013) {
    const double fy = lateral_force(a, 1.6e5, 7000.0);
    EXPECT_NEAR(lateral_force(-a, 1.6e5, 7000.0), -fy, 1e-12 * 7000.0);
    EXPECT_LE(std::abs(fy), 7000.0);
    if (std::abs(2 * 1.6e5 * a / 7000.0) < 30.0) {
      EXPECT_LT(std::abs(fy), 7000.0);
    }
  }
  const double eps = 1e-6;
  const double slope = (lateral_force(eps, 1.6e5, 7000.0) - lateral_force(-eps, 1.6e5, 7000.0)) / (2 * eps);
  EXPECT_NEAR(slope / -1.6e5, 1.0, 1e-3);
}

TEST(SlipAngles, Examples) {
  const VehicleParams p;
  VehicleState s = cruising(20.0);
  auto a = slip_angles(s, p);
  EXPECT_EQ(a.front, 0.0);
  EXPECT_EQ(a.rear, 0.0);
  s.delta_f = 0.1;
  a = slip_angles(s, p);
  EXPECT_NEAR(a.front, -0.1, 1e-15);
  EXPECT_EQ(a.rear, 0.0);
  s = cruising(20.0);
  s.v = 0.5;
  s.r = 0.3;
  a = slip_angles(s, p);
  EXPECT_NEAR(a.front, 0.0474644, 1e-6);
  EXPECT_NEAR(a.rear, 0.0024999948, 1e-9);
}

TEST(SlipAngles, LowSpeedIsDomainError) {
  EXPECT_THROW(slip_angles(cruising(0.05), VehicleParams{}), DomainError);
  EXPECT_THROW(dynamics(cruising(0.1), ControlInput{}, VehicleParams{}), DomainError);
}

TEST(Dynamics, StraightSteadyRun) {
  const VehicleParams p;
  const auto d = dynamics(cruising(20.0), ControlInput{}, p);
  StateVec<double> expect = StateVec<double>::Zero();
  expect[kX] = 20.0;
  EXPECT_LT((d - expect).norm(), 1e-12);
  VehicleState s = cruising(20.0);
  s.psi = std::numbers::pi / 2;
  const auto r = dynamics(s, ControlInput{}, p);
  EXPECT_NEAR(r[kX], 0.0, 1e-12);
  EXPECT_NEAR(r[kY], 20.0, 1e-12);
}

TEST(Dynamics, ControlsEnterLinearly) {
  const auto d = dynamics(cruising(15.0), ControlInput{0.3, -2.0}, VehicleParams{});
  EXPECT_EQ(d[kDelta], 0.3);
  EXPECT_EQ(d[kAx], -2.0);
}

TEST(Dynamics, JacobianMatchesFiniteDifferences) {
  const VehicleParams p;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    StateVec<double> s;
    s << 100 * U(rng), 100 * U(rng), 2 * U(rng), 0.8 * U(rng), 3 * U(rng), 25 + 15 * U(rng), 0.2 * U(rng),
        6 * U(rng);
    ControlVec<double> u(0.5 * U(rng), 20 * U(rng));
    const DynamicsJacobian J = dynamics_jacobian(s, u, p);
    for (int j = 0; j < kStateDim + kControlDim; ++j) {
      const double h = 1e-6 * std::max(1.0, j < kStateDim ? std::abs(s[j]) : std::abs(u[j - kStateDim]));
      StateVec<double> sp = s, sm = s;
      ControlVec<double> up = u, um = u;
      if (j < kStateDim) {
        sp[j] += h;
        sm[j] -= h;
      } else {
        up[j - kStateDim] += h;
        um[j - kStateDim] -= h;
      }
      const StateVec<double> col = (dynamics<double>(sp, up, p) - dynamics<double>(sm, um, p)) / (2 * h);
      for (int i = 0; i < kStateDim; ++i) {
        const double an = j < kStateDim ? J.dstate(i, j) : J.dcontrol(i, j - kStateDim);
        EXPECT_NEAR(an, col[i], 1e-5 * std::max(1.0, std::abs(col[i])));
      }
    }
  }
}

TEST(StepPrediction, StraightRunAdvancesX) {
  const VehicleParams p;
  const VehicleState s = cruising(20.0);
  const VehicleState n = step_prediction(s, ControlInput{}, 0.15, p);
  EXPECT_NEAR(n.x, 3.0, 1e-9);
  EXPECT_NEAR(n.y, 0.0, 1e-12);
  EXPECT_NEAR(n.ux, 20.0, 1e-12);
}

TEST(StepPrediction, SatisfiesBackwardEulerDefect) {
  const VehicleParams p;
  VehicleState s = cruising(18.0);
  s.delta_f = 0.05;
  s.r = 0.1;
  s.v = 0.2;
  s.ax = 1.0;
  const ControlInput u{0.1, -3.0};
  const VehicleState n = step_prediction(s, u, 0.15, p);
  const StateVec<double> defect = n.to_vector() - s.to_vector() - 0.15 * dynamics(n, u, p);
  EXPECT_LT(defect.lpNorm<Eigen::Infinity>(), 1e-8);
  EXPECT_NEAR(n.psi - s.psi, 0.15 * n.r, 1e-8);
}

TEST(StepPrediction, FirstOrderConvergence) {
  const VehicleParams p;
  VehicleState s0 = cruising(20.0);
  s0.delta_f = 0.03;
  const ControlInput u{0.05, 1.0};
  const double T = 1.2;
  const VehicleState ref = step_plant(s0, u, T, p, 1e-4);
  auto err = [&](int n) {
    VehicleState s = s0;
    for (int i = 0; i < n; ++i) s = step_prediction(s, u, T / n, p);
    return (s.to_vector() - ref.to_vector()).norm();
  };
  const double e1 = err(8);
  const double e2 = err(16);
  EXPECT_NEAR(e1 / e2, 2.0, 0.4);
}

TEST(StepPlant, StraightRunOneSecond) {
  const VehicleState n = step_plant(cruising(20.0), ControlInput{}, 1.0, VehicleParams{});
  EXPECT_NEAR(n.x, 20.0, 1e-9);
}

TEST(StepPlant, SteeringRateIntegratesExactly) {
  const VehicleState n = step_plant(cruising(20.0), ControlInput{0.02, 0.0}, 1.0, VehicleParams{});
  EXPECT_NEAR(n.delta_f, 0.02, 1e-12);
}

TEST(StepPlant, AgreesWithPredictionToFirstOrder) {
  const VehicleParams p;
  VehicleState s = cruising(20.0);
  s.delta_f = 0.02;
  const ControlInput u{0.05, 1.0};
  const VehicleState a = step_plant(s, u, 0.15, p);
  const VehicleState b = step_prediction(s, u, 0.15, p);
  const StateVec<double> fdot = dynamics(s, u, p);
  // Local error of both integrators is O(dt^2 |f'|); use a generous constant.
  EXPECT_LT((a.to_vector() - b.to_vector()).norm(), 0.15 * 0.15 * 10.0 * std::max(1.0, fdot.norm() / 20.0));
}

TEST(VehicleParams, InvalidValuesRejected) {
  VehicleParams p;
  p.b_r = 1.5;
  EXPECT_THROW(p.validate(), ConfigError);
  p = VehicleParams{};
  p.M = -1.0;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(VehicleParams, ConfigOverrides) {
  const auto cfg = KeyValueConfig::parse("M = 1500\nmu_f = 1.0 # dry\n");
  const VehicleParams p = VehicleParams::from_config(cfg);
  EXPECT_EQ(p.M, 1500.0);
  EXPECT_EQ(p.mu_f, 1.0);
  EXPECT_EQ(p.Izz, 3500.0);
}
