#pragma once

// Axle force building blocks of the single-track model: longitudinal load
// transfer, the smooth drive/brake split, the softplus-derated friction
// circle and the sigmoid lateral tire curve.

#include "envmpc/autodiff/smooth.hpp"
#include "envmpc/vehicle/params.hpp"

#include <utility>

namespace envmpc {

template <typename T>
struct AxlePair {
  T front;
  T rear;
};

/// Normal loads for a commanded acceleration ax [m/s^2]. Fzf + Fzr = M g.
template <typename T>
AxlePair<T> load_transfer(const VehicleParams& p, const T& ax) {
  const double L = p.wheelbase();
  const double kz = p.Kz();
  return {(p.Lr / L) * p.M * p.g - kz * ax, (p.Lf / L) * p.M * p.g + kz * ax};
}

/// Rear-drive / proportional-brake split with the branch replaced by a
/// sigmoid gate of sharpness p_split. Fxf + Fxr == Fx by construction.
template <typename T>
AxlePair<T> longitudinal_split_smooth(const VehicleParams& p, const T& Fx) {
  const T gate = sigmoid(-p.p_split * Fx);
  const T front = gate * p.b_r * Fx;
  return {front, Fx - front};
}

/// Lateral force capacity left after the longitudinal demand Fx is served.
/// The softplus keeps the radicand positive when |Fx| exceeds mu Fz.
template <typename T>
T max_lateral_force(const T& Fx, const T& Fz, double mu, double sharpness) {
  const T util = Fx / (mu * Fz);
  const T radicand = softplus(sharpness * (1.0 - util * util)) / sharpness;
  return sqrt(radicand) * mu * Fz;
}

/// Sigmoid tire curve: slope -Ca at the origin, saturating at -/+ Fy_max.
template <typename T>
T lateral_force(const T& alpha, double Ca, const T& Fy_max) {
  return -2.0 * Fy_max * (sigmoid(2.0 * Ca * alpha / Fy_max) - 0.5);
}

}  // namespace envmpc
