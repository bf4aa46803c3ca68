#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>

namespace envmpc {

inline constexpr int kStateDim = 8;
inline constexpr int kControlDim = 2;

/// Index of each state component inside the packed 8-vector.
enum StateIndex : int {
  kX = 0,
  kY = 1,
  kV = 2,
  kR = 3,
  kPsi = 4,
  kUx = 5,
  kDelta = 6,
  kAx = 7,
};

enum ControlIndex : int {
  kDeltaRate = 0,
  kJerk = 1,
};

template <typename T>
using StateVec = Eigen::Matrix<T, kStateDim, 1>;
template <typename T>
using ControlVec = Eigen::Matrix<T, kControlDim, 1>;

/// Single-track vehicle state. ax is the commanded longitudinal acceleration
/// Fx / M, not dux/dt.
struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double v = 0.0;
  double r = 0.0;
  double psi = 0.0;
  double ux = 0.0;
  double delta_f = 0.0;
  double ax = 0.0;

  StateVec<double> to_vector() const {
    StateVec<double> s;
    s << x, y, v, r, psi, ux, delta_f, ax;
    return s;
  }

  static VehicleState from_vector(const StateVec<double>& s) {
    return {s[kX], s[kY], s[kV], s[kR], s[kPsi], s[kUx], s[kDelta], s[kAx]};
  }

  bool finite() const { return to_vector().allFinite(); }

  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

struct ControlInput {
  double delta_f_rate = 0.0;
  double jx = 0.0;

  ControlVec<double> to_vector() const { return {delta_f_rate, jx}; }
  static ControlInput from_vector(const ControlVec<double>& u) { return {u[0], u[1]}; }

  friend bool operator==(const ControlInput&, const ControlInput&) = default;
};

}  // namespace envmpc
