#pragma once

#include "envmpc/vehicle/dynamics.hpp"

#include <Eigen/LU>

#include <cmath>
#include <stdexcept>
#include <string>

namespace envmpc {

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Implicit backward Euler step x1 = x0 + dt f(x1, u), the same relation the
/// collocation defects enforce. Solved by damped Newton to `tol` in the
/// infinity norm of the defect.
inline VehicleState step_prediction(const VehicleState& state, const ControlInput& control, double dt,
                                    const VehicleParams& p, double tol = 1e-8, int max_iter = 50) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("step_prediction: dt must be positive");
  }
  const StateVec<double> x0 = state.to_vector();
  const ControlVec<double> u = control.to_vector();
  auto defect = [&](const StateVec<double>& x1) { return StateVec<double>(x1 - x0 - dt * dynamics<double>(x1, u, p)); };

  StateVec<double> x = x0 + dt * dynamics<double>(x0, u, p);
  StateVec<double> F = defect(x);
  double res = F.lpNorm<Eigen::Infinity>();
  for (int it = 0; it < max_iter && res > tol; ++it) {
    const DynamicsJacobian jac = dynamics_jacobian(x, u, p);
    const Eigen::Matrix<double, kStateDim, kStateDim> J =
        Eigen::Matrix<double, kStateDim, kStateDim>::Identity() - dt * jac.dstate;
    const StateVec<double> dx = J.partialPivLu().solve(-F);
    double alpha = 1.0;
    for (int ls = 0; ls < 30; ++ls) {
      StateVec<double> trial = x + alpha * dx;
      bool ok = trial[kUx] > kMinSlipSpeed;
      double trial_res = 0.0;
      StateVec<double> Ft;
      if (ok) {
        Ft = defect(trial);
        trial_res = Ft.lpNorm<Eigen::Infinity>();
        ok = std::isfinite(trial_res) && trial_res < (1.0 - 1e-4 * alpha) * res;
      }
      if (ok) {
        x = trial;
        F = Ft;
        res = trial_res;
        break;
      }
      alpha *= 0.5;
    }
  }
  if (!(res <= tol)) {
    throw IntegrationError("backward Euler step did not converge", res);
  }
  return VehicleState::from_vector(x);
}

inline constexpr double kPlantStep = 1e-3;  // [s]

/// Classical RK4 with 1 ms inner steps and zero-order-hold control. This is
/// the simulated vehicle, deliberately distinct from the prediction integrator.
inline VehicleState step_plant(const VehicleState& state, const ControlInput& control, double dt,
                               const VehicleParams& p, double inner = kPlantStep) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("step_plant: dt must be positive");
  }
  const ControlVec<double> u = control.to_vector();
  StateVec<double> x = state.to_vector();
  const int n = static_cast<int>(std::ceil(dt / inner - 1e-9));
  const double h = dt / n;
  for (int i = 0; i < n; ++i) {
    const StateVec<double> k1 = dynamics<double>(x, u, p);
    const StateVec<double> k2 = dynamics<double>(StateVec<double>(x + 0.5 * h * k1), u, p);
    const StateVec<double> k3 = dynamics<double>(StateVec<double>(x + 0.5 * h * k2), u, p);
    const StateVec<double> k4 = dynamics<double>(StateVec<double>(x + h * k3), u, p);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return VehicleState::from_vector(x);
}

}  // namespace envmpc
