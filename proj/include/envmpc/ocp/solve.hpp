#pragma once

#include "envmpc/ocp/ipm.hpp"
#include "envmpc/ocp/transcription.hpp"
#include "envmpc/vehicle/integrators.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace envmpc {

struct OcpSolveOptions {
  IpmOptions ipm;
  double budget_ms = 100.0;
  bool enforce_budget = false;  ///< stop on wall clock; otherwise only the iteration cap applies
  double defect_tol = 1e-6;
  double violation_tol = 1e-6;
};

struct OcpSolution {
  std::vector<VehicleState> states;
  std::vector<ControlInput> controls;
  double objective = 0.0;
  CostBreakdown breakdown;
  SolveStatus status = SolveStatus::infeasible;
  double solve_time_ms = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  double max_defect = 0.0;
  double max_violation = 0.0;
  bool warm_started = false;
  std::string message;
  IpmIterate duals;  ///< raw solver iterate, reused for warm starts

  bool converged() const { return status == SolveStatus::converged; }
  Trajectory trajectory() const { return {states, controls}; }
};

/// Initial guess for a solve: a trajectory and optionally solver multipliers.
struct WarmStart {
  Trajectory guess;
  IpmIterate duals;
};

/// Largest violation of the envelope rows, power rows and box bounds.
inline double max_constraint_violation(const OcpProblem& p, const Trajectory& t) {
  const LinearBounds& b = p.bounds;
  double v = 0.0;
  auto box = [&](double x, double lo, double hi) { v = std::max({v, lo - x, x - hi}); };
  for (std::size_t j = 1; j < t.states.size(); ++j) {
    const VehicleState& s = t.states[j];
    v = std::max(v, p.envelope.constraint(s.x, s.y) + p.delta_strict + p.envelope_margin);
    v = std::max(v, power_limit_residual(s.ux, s.ax, b.p_a, b.p_b));
    box(s.v, b.v_min, b.v_max);
    box(s.r, b.r_min, b.r_max);
    box(s.ux, b.ux_min, b.ux_max);
    box(s.delta_f, b.delta_min, b.delta_max);
    box(s.ax, b.ax_min, b.ax_max);
  }
  for (const ControlInput& u : t.controls) {
    box(u.delta_f_rate, b.delta_rate_min, b.delta_rate_max);
    box(u.jx, b.jx_min, b.jx_max);
  }
  return v;
}

inline OcpSolution solve_ocp(const OcpProblem& problem, const OcpSolveOptions& opt = {},
                             const WarmStart* warm = nullptr) {
  const OcpNlp nlp(problem);
  IpmOptions ipm = opt.ipm;
  ipm.max_wall_ms = opt.enforce_budget ? opt.budget_ms : std::numeric_limits<double>::infinity();
  InteriorPointSolver<OcpNlp> solver(nlp, ipm);

  OcpSolution sol;
  IpmResult res;
  if (warm != nullptr) {
    Trajectory guess = warm->guess;
    guess.states.front() = problem.x0;
    const Eigen::VectorXd z0 = nlp.scale_in(guess);
    if (warm->duals.lambda.size() == nlp.m()) {
      IpmIterate it = warm->duals;
      it.x = z0;
      res = solver.solve(z0, &it);
    } else {
      res = solver.solve(z0);
    }
    sol.warm_started = true;
  } else {
    res = solver.solve(nlp.scale_in(straight_rollout(problem)));
  }

  const Trajectory t = nlp.trajectory(res.it.x);
  sol.states = t.states;
  sol.controls = t.controls;
  sol.status = res.status;
  sol.iterations = res.iterations;
  sol.kkt_residual = res.kkt_error;
  sol.solve_time_ms = res.wall_ms;
  sol.message = res.message;
  sol.duals = res.it;
  sol.max_defect = defect_residuals(t, problem.grid, problem.params).lpNorm<Eigen::Infinity>();
  sol.max_violation = std::max(0.0, max_constraint_violation(problem, t));
  if (!t.states.back().finite()) {
    sol.status = SolveStatus::infeasible;
    sol.message = "non-finite iterate";
    return sol;
  }
  try {
    sol.breakdown = evaluate_breakdown(problem, t);
  } catch (const DomainError& e) {
    sol.status = SolveStatus::infeasible;
    sol.message = e.what();
    return sol;
  }
  sol.objective = res.objective;
  if (sol.status == SolveStatus::converged &&
      (sol.max_defect >= opt.defect_tol || sol.max_violation >= opt.violation_tol)) {
    sol.status = SolveStatus::max_iter;
    sol.message = "KKT tolerance met but unscaled residuals above tolerance";
  }
  return sol;
}

namespace detail {

// Position of time tau on a grid timeline: interval index and fraction.
inline std::pair<int, double> locate(const std::vector<double>& times, double tau) {
  const int N = static_cast<int>(times.size()) - 1;
  for (int i = 0; i < N; ++i) {
    if (tau <= times[i + 1]) {
      return {i, std::clamp((tau - times[i]) / (times[i + 1] - times[i]), 0.0, 1.0)};
    }
  }
  return {N, 0.0};
}

// Shift a stage-stacked vector (stride w per stage, stage k attached to
// point k+1) along the timeline.
inline Eigen::VectorXd shift_stages(const Eigen::VectorXd& v, int w, const std::vector<double>& times,
                                    double elapsed) {
  const int N = static_cast<int>(times.size()) - 1;
  if (v.size() != static_cast<Eigen::Index>(w) * N) return v;
  Eigen::VectorXd out(v.size());
  for (int k = 0; k < N; ++k) {
    const auto [i, f] = locate(times, times[k + 1] + elapsed);
    // Stage index of old point i (point i belongs to stage i-1).
    const int a = std::clamp(i - 1, 0, N - 1);
    const int b = std::clamp(i, 0, N - 1);
    out.segment(k * w, w) = i >= N ? v.segment((N - 1) * w, w)
                                   : Eigen::VectorXd((1.0 - f) * v.segment(a * w, w) + f * v.segment(b * w, w));
  }
  return out;
}

}  // namespace detail

/// Advances a solution by `elapsed` seconds along its own timeline. States
/// are linearly interpolated; past the horizon the final state is carried
/// forward by a zero-control rollout, or held if that leaves the model
/// domain. Controls are sampled piecewise-constant and are zero past the
/// horizon. Multipliers move with their stage.
inline WarmStart warm_shift(const OcpSolution& sol, double elapsed, const CollocationGrid& grid,
                            const VehicleParams& params) {
  WarmStart w;
  const std::vector<double> times = grid.times();
  const int N = grid.intervals();
  const double tf = times.back();
  for (int j = 0; j <= N; ++j) {
    const double tau = times[j] + elapsed;
    if (tau <= tf) {
      const auto [i, f] = detail::locate(times, tau);
      if (i >= N || f == 0.0) {
        w.guess.states.push_back(sol.states[std::min(i, N)]);
      } else if (f == 1.0) {
        w.guess.states.push_back(sol.states[i + 1]);
      } else {
        const StateVec<double> s = (1.0 - f) * sol.states[i].to_vector() + f * sol.states[i + 1].to_vector();
        w.guess.states.push_back(VehicleState::from_vector(s));
      }
    } else {
      VehicleState tail = sol.states.back();
      try {
        tail = step_plant(tail, ControlInput{}, tau - tf, params);
      } catch (const DomainError&) {
      }
      w.guess.states.push_back(tail.finite() ? tail : sol.states.back());
    }
  }
  for (int k = 0; k < N; ++k) {
    const double tau = times[k] + elapsed;
    int i = -1;
    for (int q = 0; q < N; ++q) {
      if (times[q] <= tau + 1e-12 && tau + 1e-12 < times[q + 1]) {
        i = q;
        break;
      }
    }
    w.guess.controls.push_back(i < 0 ? ControlInput{} : sol.controls[i]);
  }
  if (sol.duals.valid()) {
    w.duals = sol.duals;
    w.duals.lambda = detail::shift_stages(sol.duals.lambda, kStageRows, times, elapsed);
    w.duals.zl = detail::shift_stages(sol.duals.zl, kStageStride, times, elapsed);
    w.duals.zu = detail::shift_stages(sol.duals.zu, kStageStride, times, elapsed);
    w.duals.s = detail::shift_stages(sol.duals.s, 2, times, elapsed);
    w.duals.vl = detail::shift_stages(sol.duals.vl, 2, times, elapsed);
    w.duals.vu = detail::shift_stages(sol.duals.vu, 2, times, elapsed);
  }
  return w;
}

}  // namespace envmpc
