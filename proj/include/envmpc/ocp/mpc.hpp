#pragma once

// Receding-horizon loop around solve_ocp: warm starts from the shifted
// previous solution, falls back to the stored plan on failure and latches a
// braking ramp after repeated failures.

#include "envmpc/envelope/bounds.hpp"
#include "envmpc/ocp/solve.hpp"

#include <algorithm>
#include <limits>
#include <optional>

namespace envmpc {

struct MpcOptions {
  double period = 0.1;  ///< [s] controller tick
  OcpSolveOptions solve;
  int cold_max_iter = 400;  ///< iteration cap when no previous solution exists
  int max_consecutive_failures = 5;
  double warm_mu = 1e-3;
  double warm_bound_push = 1e-3;
  bool reuse_multipliers = true;
};

struct MpcState {
  std::optional<OcpSolution> last_solution;
  double last_solve_wall_time = -std::numeric_limits<double>::infinity();  ///< sim time of the last success
  int consecutive_failures = 0;
  bool safe_stop = false;
};

struct MpcStepResult {
  ControlInput control;
  std::optional<OcpSolution> solution;  ///< absent once the safe stop is latched
  bool fallback = false;
  bool safe_stop = false;
};

/// Full braking within the friction-derived ax bounds, wheel held straight.
inline ControlInput safe_stop_control(const VehicleState& s, const LinearBounds& b, double period) {
  ControlInput u;
  u.delta_f_rate = 0.0;
  u.jx = std::clamp((b.ax_min - s.ax) / period, b.jx_min, b.jx_max);
  return u;
}

/// The planned control of the interval containing `elapsed` seconds into the
/// solution's horizon; an interval boundary belongs to the later interval.
inline ControlInput shifted_control(const OcpSolution& sol, const CollocationGrid& grid, double elapsed) {
  const std::vector<double> t = grid.times();
  std::size_t k = 0;
  while (k + 1 < sol.controls.size() && t[k + 1] <= elapsed + 1e-9) ++k;
  return sol.controls[k];
}

/// One controller tick at sim time `now`. `problem.x0` is the measured state;
/// the caller fills in the envelope view and scenario terms.
inline MpcStepResult mpc_step(MpcState& mpc, const OcpProblem& problem, double now, const MpcOptions& opt) {
  MpcStepResult out;
  if (mpc.safe_stop) {
    out.control = safe_stop_control(problem.x0, problem.bounds, opt.period);
    out.safe_stop = true;
    return out;
  }

  OcpSolveOptions so = opt.solve;
  OcpSolution sol;
  if (mpc.last_solution) {
    const double elapsed = std::max(0.0, now - mpc.last_solve_wall_time);
    WarmStart w = warm_shift(*mpc.last_solution, elapsed, problem.grid, problem.params);
    if (opt.reuse_multipliers && w.duals.valid()) {
      w.duals.mu = std::max(w.duals.mu, opt.warm_mu);
      so.ipm.warm_bound_push = opt.warm_bound_push;
    } else {
      w.duals = IpmIterate{};
    }
    sol = solve_ocp(problem, so, &w);
  } else {
    so.ipm.max_iter = std::max(so.ipm.max_iter, opt.cold_max_iter);
    sol = solve_ocp(problem, so);
  }

  if (sol.converged()) {
    out.control = sol.controls.front();
    mpc.last_solution = sol;
    mpc.last_solve_wall_time = now;
    mpc.consecutive_failures = 0;
    out.solution = std::move(sol);
    return out;
  }

  ++mpc.consecutive_failures;
  out.solution = std::move(sol);
  out.fallback = true;
  if (mpc.consecutive_failures >= opt.max_consecutive_failures || !mpc.last_solution) {
    if (mpc.consecutive_failures >= opt.max_consecutive_failures) mpc.safe_stop = true;
    out.control = safe_stop_control(problem.x0, problem.bounds, opt.period);
    out.safe_stop = mpc.safe_stop;
    return out;
  }
  out.control = shifted_control(*mpc.last_solution, problem.grid, now - mpc.last_solve_wall_time + 0.5 * opt.period);
  return out;
}

}  // namespace envmpc
