#pragma once

// 3-DoF single-track dynamics xi_dot = A(xi) + B zeta with longitudinal load
// transfer and friction-circle derated lateral tire forces.

#include "envmpc/vehicle/state.hpp"
#include "envmpc/vehicle/tire.hpp"

#include <stdexcept>
#include <string>

namespace envmpc {

inline constexpr double kMinSlipSpeed = 0.1;  // [m/s]

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// All intermediate axle quantities for one evaluation.
template <typename T>
struct AxleForcesT {
  T Fxf, Fxr;
  T Fyf, Fyr;
  T Fzf, Fzr;
  T Fyf_max, Fyr_max;
  T alpha_f, alpha_r;
};
using AxleForces = AxleForcesT<double>;

template <typename T>
AxlePair<T> slip_angles(const T& v, const T& r, const T& ux, const T& delta_f, const VehicleParams& p) {
  if (!(value_of(ux) > kMinSlipSpeed)) {
    throw DomainError("slip angles undefined: ux = " + std::to_string(value_of(ux)) +
                      " m/s is below the " + std::to_string(kMinSlipSpeed) + " m/s floor");
  }
  return {atan((v + p.Lf * r) / ux) - delta_f, atan((v - p.Lr * r) / ux)};
}

inline AxlePair<double> slip_angles(const VehicleState& s, const VehicleParams& p) {
  return slip_angles(s.v, s.r, s.ux, s.delta_f, p);
}

template <typename T>
AxleForcesT<T> axle_forces(const T& v, const T& r, const T& ux, const T& delta_f, const T& ax,
                           const VehicleParams& p) {
  AxleForcesT<T> f;
  const auto [fxf, fxr] = longitudinal_split_smooth(p, T(p.M * ax));
  const auto [fzf, fzr] = load_transfer(p, ax);
  const auto [af, ar] = slip_angles(v, r, ux, delta_f, p);
  f.Fxf = fxf;
  f.Fxr = fxr;
  f.Fzf = fzf;
  f.Fzr = fzr;
  f.alpha_f = af;
  f.alpha_r = ar;
  f.Fyf_max = max_lateral_force(fxf, fzf, p.mu_f, p.p_friction);
  f.Fyr_max = max_lateral_force(fxr, fzr, p.mu_r, p.p_friction);
  f.Fyf = lateral_force(af, p.Caf, f.Fyf_max);
  f.Fyr = lateral_force(ar, p.Car, f.Fyr_max);
  return f;
}

inline AxleForces axle_forces(const VehicleState& s, const VehicleParams& p) {
  return axle_forces(s.v, s.r, s.ux, s.delta_f, s.ax, p);
}

/// The six nonlinear rows of A(xi) as functions of (v, r, psi, ux, delta_f, ax).
/// Order: x_dot, y_dot, v_dot, r_dot, psi_dot, ux_dot.
template <typename T>
std::array<T, 6> drift_terms(const T& v, const T& r, const T& psi, const T& ux, const T& delta_f, const T& ax,
                             const VehicleParams& p) {
  const AxleForcesT<T> f = axle_forces(v, r, ux, delta_f, ax, p);
  const T cd = cos(delta_f);
  const T sd = sin(delta_f);
  const T cp = cos(psi);
  const T sp = sin(psi);
  const T front_lat = f.Fyf * cd + f.Fxf * sd;
  return {
      ux * cp - v * sp,
      ux * sp + v * cp,
      (front_lat + f.Fyr) / p.M - ux * r,
      (front_lat * p.Lf - f.Fyr * p.Lr) / p.Izz,
      r,
      ax + r * v - f.Fyf * sd / p.M,
  };
}

/// Full state derivative A(xi) + B zeta.
template <typename T>
StateVec<T> dynamics(const StateVec<T>& s, const ControlVec<T>& u, const VehicleParams& p) {
  const auto a = drift_terms(s[kV], s[kR], s[kPsi], s[kUx], s[kDelta], s[kAx], p);
  StateVec<T> d;
  for (int i = 0; i < 6; ++i) {
    d[i] = a[i];
  }
  d[kDelta] = u[kDeltaRate];
  d[kAx] = u[kJerk];
  return d;
}

inline StateVec<double> dynamics(const VehicleState& s, const ControlInput& u, const VehicleParams& p) {
  return dynamics<double>(s.to_vector(), u.to_vector(), p);
}

/// Jacobians of the state derivative with respect to state and control.
struct DynamicsJacobian {
  StateVec<double> value;
  Eigen::Matrix<double, kStateDim, kStateDim> dstate;
  Eigen::Matrix<double, kStateDim, kControlDim> dcontrol;
};

inline DynamicsJacobian dynamics_jacobian(const StateVec<double>& s, const ControlVec<double>& u,
                                          const VehicleParams& p) {
  using D = Dual<kStateDim + kControlDim>;
  StateVec<D> sd;
  ControlVec<D> ud;
  for (int i = 0; i < kStateDim; ++i) sd[i] = D::variable(s[i], i);
  for (int i = 0; i < kControlDim; ++i) ud[i] = D::variable(u[i], kStateDim + i);
  const StateVec<D> out = dynamics(sd, ud, p);
  DynamicsJacobian j;
  for (int i = 0; i < kStateDim; ++i) {
    j.value[i] = out[i].v;
    j.dstate.row(i) = out[i].d.template head<kStateDim>().transpose();
    j.dcontrol.row(i) = out[i].d.template tail<kControlDim>().transpose();
  }
  return j;
}

/// Planar CG acceleration in the body frame (longitudinal, lateral), i.e.
/// (dux/dt - r v, dv/dt + ux r).
inline Eigen::Vector2d body_acceleration(const VehicleState& s, const VehicleParams& p) {
  const StateVec<double> d = dynamics(s, ControlInput{}, p);
  return {d[kUx] - s.r * s.v, d[kV] + s.ux * s.r};
}

}  // namespace envmpc
