#pragma once

// Stage, envelope and scenario-specific cost terms. All are templates over
// the scalar type so the transcription can take exact derivatives.

#include "envmpc/autodiff/smooth.hpp"
#include "envmpc/cost/weights.hpp"
#include "envmpc/envelope/spatial_envelope.hpp"
#include "envmpc/vehicle/dynamics.hpp"

#include <string>

namespace envmpc {

template <typename T>
T state_cost(const T& v, const T& r, const T& ux, const T& delta_f, const T& ax, const CostWeights& w) {
  if (!(value_of(ux) > kMinSlipSpeed)) {
    throw DomainError("state cost curvature term undefined at ux = " + std::to_string(value_of(ux)));
  }
  const T kappa = r / ux;
  return w.w_delta_f * delta_f * delta_f + w.w_ax * ax * ax + w.w_v * v * v + w.w_kappa * kappa * kappa;
}

template <typename T>
T control_cost(const T& delta_f_rate, const T& jx, const CostWeights& w) {
  return w.w_delta_f_rate * delta_f_rate * delta_f_rate + w.w_jx * jx * jx;
}

/// Integrand of the stage cost at one point (state and control parts).
inline CostBreakdown stage_cost_parts(const VehicleState& s, const ControlInput& u, const CostWeights& w) {
  CostBreakdown b;
  b.state = state_cost(s.v, s.r, s.ux, s.delta_f, s.ax, w);
  b.control = control_cost(u.delta_f_rate, u.jx, w);
  return b;
}

inline double stage_cost(const VehicleState& s, const ControlInput& u, const CostWeights& w) {
  return stage_cost_parts(s, u, w).total();
}

/// Softplus penalty on the conservative envelope constraint value: close to
/// zero well inside, slope w * theta_hp once outside by more than 1/theta_hp.
template <typename T>
T envelope_cost(const T& g_envelope, double w_envelope, double theta_hp, double g_sm) {
  return w_envelope * softplus(theta_hp * (g_envelope + g_sm));
}

template <typename T>
T envelope_cost(const T& x, const T& y, const SpatialEnvelope& env, const CostWeights& w) {
  return envelope_cost(env.constraint(x, y), w.w_envelope, w.theta_hp, w.g_sm);
}

template <typename T>
T speed_cost(const T& ux, double u_des, double w_speed) {
  const T e = ux - u_des;
  return w_speed * e * e;
}

/// Remaining progress toward goal_x as a fraction of the distance at the
/// horizon start. Zero when the start already sits on the goal.
template <typename T>
T terminal_cost_offroad(double x0, const T& xf, double x_goal) {
  if (x0 == x_goal) {
    return T(0.0);
  }
  return (xf - x_goal) / (x0 - x_goal);
}

}  // namespace envmpc
