#include "envmpc/ocp/mpc.hpp"

#include <gtest/gtest.h>

using namespace envmpc;

namespace {

OcpProblem corridor_problem() {
  std::vector<EnvelopeBlock> blocks;
  for (double x = -20.0; x < 400.0; x += 40.0) {
    EnvelopeBlock b;
    b.xb = x;
    b.Lb = 25.0;
    b.Wb = 5.0;
    blocks.push_back(b);
  }
  OcpProblem p;
  p.x0.ux = 20.0;
  p.x0.y = 0.5;
  p.bounds = LinearBounds::for_vehicle(p.params);
  p.envelope = SpatialEnvelope::finalize(blocks);
  return p;
}

MpcOptions timeout_options() {
  MpcOptions o;
  o.solve.enforce_budget = true;
  o.solve.budget_ms = 1e-6;
  return o;
}

}  // namespace

TEST(MpcStep, SuccessAppliesFirstInterval) {
  MpcState mpc;
  const OcpProblem p = corridor_problem();
  const MpcStepResult r = mpc_step(mpc, p, 0.0, MpcOptions{});
  ASSERT_TRUE(r.solution.has_value());
  ASSERT_TRUE(r.solution->converged()) << r.solution->message;
  EXPECT_FALSE(r.fallback);
  EXPECT_EQ(r.control, r.solution->controls.front());
  EXPECT_EQ(mpc.consecutive_failures, 0);
  ASSERT_TRUE(mpc.last_solution.has_value());
  EXPECT_EQ(mpc.last_solve_wall_time, 0.0);
}

TEST(MpcStep, SingleTimeoutAppliesSecondInterval) {
  MpcState mpc;
  OcpProblem p = corridor_problem();
  ASSERT_TRUE(mpc_step(mpc, p, 0.0, MpcOptions{}).solution->converged());
  const std::vector<ControlInput> plan = mpc.last_solution->controls;
  p.x0 = mpc.last_solution->states[1];
  const MpcStepResult r = mpc_step(mpc, p, 0.1, timeout_options());
  EXPECT_TRUE(r.fallback);
  EXPECT_EQ(r.solution->status, SolveStatus::timeout);
  EXPECT_EQ(r.control, plan[1]);
  EXPECT_EQ(mpc.consecutive_failures, 1);
  EXPECT_EQ(mpc.last_solve_wall_time, 0.0);
}

TEST(MpcStep, SuccessResetsFailureCount) {
  MpcState mpc;
  OcpProblem p = corridor_problem();
  ASSERT_TRUE(mpc_step(mpc, p, 0.0, MpcOptions{}).solution->converged());
  mpc_step(mpc, p, 0.1, timeout_options());
  mpc_step(mpc, p, 0.2, timeout_options());
  EXPECT_EQ(mpc.consecutive_failures, 2);
  const MpcStepResult r = mpc_step(mpc, p, 0.3, MpcOptions{});
  ASSERT_TRUE(r.solution->converged()) << r.solution->message;
  EXPECT_TRUE(r.solution->warm_started);
  EXPECT_EQ(mpc.consecutive_failures, 0);
  EXPECT_EQ(mpc.last_solve_wall_time, 0.3);
}

TEST(MpcStep, RepeatedFailuresLatchSafeStop) {
  MpcState mpc;
  OcpProblem p = corridor_problem();
  ASSERT_TRUE(mpc_step(mpc, p, 0.0, MpcOptions{}).solution->converged());
  const std::vector<ControlInput> plan = mpc.last_solution->controls;
  // tick midpoints 0.15, 0.25, 0.35, 0.45 s against interval starts 0, 0.15, 0.3, 0.45
  const std::vector<int> expected{1, 1, 2, 3};
  for (int k = 1; k <= 4; ++k) {
    const MpcStepResult r = mpc_step(mpc, p, 0.1 * k, timeout_options());
    EXPECT_FALSE(r.safe_stop);
    EXPECT_EQ(r.control, plan[expected[k - 1]]) << k;
  }
  const MpcStepResult stop = mpc_step(mpc, p, 0.5, timeout_options());
  EXPECT_TRUE(stop.safe_stop);
  EXPECT_TRUE(mpc.safe_stop);
  EXPECT_EQ(stop.control.delta_f_rate, 0.0);
  EXPECT_EQ(stop.control, safe_stop_control(p.x0, p.bounds, 0.1));

  // Latched: no further solves, even with a normal budget.
  const MpcStepResult after = mpc_step(mpc, p, 0.6, MpcOptions{});
  EXPECT_TRUE(after.safe_stop);
  EXPECT_FALSE(after.solution.has_value());
}

TEST(MpcStep, FailureWithoutPlanBrakes) {
  MpcState mpc;
  const OcpProblem p = corridor_problem();
  const MpcStepResult r = mpc_step(mpc, p, 0.0, timeout_options());
  EXPECT_TRUE(r.fallback);
  EXPECT_FALSE(r.safe_stop);
  EXPECT_EQ(r.control, safe_stop_control(p.x0, p.bounds, 0.1));
}

TEST(SafeStop, RampsToMaximumBraking) {
  const VehicleParams params;
  const LinearBounds b = LinearBounds::for_vehicle(params);
  VehicleState s;
  s.ax = 0.0;
  const ControlInput u = safe_stop_control(s, b, 0.1);
  EXPECT_EQ(u.jx, std::clamp((b.ax_min - 0.0) / 0.1, b.jx_min, b.jx_max));
  s.ax = b.ax_min;
  EXPECT_EQ(safe_stop_control(s, b, 0.1).jx, 0.0);
}
