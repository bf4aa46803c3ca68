#pragma once

// Direct transcription of the envelope-constrained OCP with backward Euler
// defects on the collocation grid.
//
// Full decision layout (stage-interleaved, 248 entries on the standard grid):
//
//   [ xi_0 (8) | zeta_0 (2) | xi_1 (8) | zeta_1 (2) | ... | zeta_{N-1} (2) | xi_N (8) ]
//
// xi_0 is the measured state and is held fixed, so the NLP works on the
// remaining entries (full index - 8). Constraints, by stage k = 0..N-1:
//
//   [ defect_k (8) | envelope at xi_{k+1} | power limit at xi_{k+1} ]
//
// defect_k = xi_{k+1} - xi_k - T_k V(xi_{k+1}, zeta_k).

#include "envmpc/autodiff/jet.hpp"
#include "envmpc/cost/cost_terms.hpp"
#include "envmpc/cost/cost_to_go.hpp"
#include "envmpc/envelope/bounds.hpp"
#include "envmpc/envelope/spatial_envelope.hpp"
#include "envmpc/ocp/grid.hpp"
#include "envmpc/ocp/ipm.hpp"
#include "envmpc/vehicle/dynamics.hpp"
#include "envmpc/vehicle/params.hpp"

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <array>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace envmpc {

inline constexpr int kStageStride = kStateDim + kControlDim;
inline constexpr int kStageRows = kStateDim + 2;

struct OcpProblem {
  VehicleState x0;
  CollocationGrid grid = CollocationGrid::standard();
  VehicleParams params;
  LinearBounds bounds;
  SpatialEnvelope envelope;
  CostWeights weights;
  std::optional<CostToGo> cost_to_go;  ///< required for the racing term
  double delta_strict = 1e-6;          ///< envelope rows are g <= -(delta_strict + envelope_margin)
  double envelope_margin = 0.0;

  int full_size() const { return kStateDim * grid.points() + kControlDim * grid.intervals(); }
  int defect_count() const { return kStateDim * grid.intervals(); }
  static int state_offset(int j) { return kStageStride * j; }
  static int control_offset(int k) { return kStageStride * k + kStateDim; }

  void validate() const {
    grid.validate();
    params.validate();
    bounds.validate();
    weights.validate();
    if (envelope.empty()) throw std::invalid_argument("OCP needs a non-empty envelope");
    if (weights.specific == SpecificCost::racing && !cost_to_go) {
      throw std::invalid_argument("racing cost selected without a fitted cost-to-go");
    }
    if (!x0.finite()) throw std::invalid_argument("initial state is not finite");
    if (!(x0.ux > kMinSlipSpeed)) throw DomainError("initial ux is below the slip-angle floor");
  }
};

/// States at the N+1 grid points and piecewise-constant controls per interval.
struct Trajectory {
  std::vector<VehicleState> states;
  std::vector<ControlInput> controls;

  Eigen::VectorXd pack() const {
    Eigen::VectorXd z(static_cast<Eigen::Index>(kStateDim * states.size() + kControlDim * controls.size()));
    for (std::size_t j = 0; j < states.size(); ++j) {
      z.segment<kStateDim>(OcpProblem::state_offset(static_cast<int>(j))) = states[j].to_vector();
    }
    for (std::size_t k = 0; k < controls.size(); ++k) {
      z.segment<kControlDim>(OcpProblem::control_offset(static_cast<int>(k))) = controls[k].to_vector();
    }
    return z;
  }

  static Trajectory unpack(const Eigen::VectorXd& z, int intervals) {
    Trajectory t;
    for (int j = 0; j <= intervals; ++j) {
      t.states.push_back(VehicleState::from_vector(z.segment<kStateDim>(OcpProblem::state_offset(j))));
    }
    for (int k = 0; k < intervals; ++k) {
      t.controls.push_back(ControlInput::from_vector(z.segment<kControlDim>(OcpProblem::control_offset(k))));
    }
    return t;
  }
};

/// Constant-speed straight-line rollout from the measured state, zero controls.
inline Trajectory straight_rollout(const OcpProblem& p) {
  Trajectory t;
  const auto times = p.grid.times();
  const VehicleState& s0 = p.x0;
  const double vx = s0.ux * std::cos(s0.psi) - s0.v * std::sin(s0.psi);
  const double vy = s0.ux * std::sin(s0.psi) + s0.v * std::cos(s0.psi);
  for (double tau : times) {
    VehicleState s = s0;
    s.x += vx * tau;
    s.y += vy * tau;
    if (tau > 0.0) s.r = 0.0;
    t.states.push_back(s);
  }
  t.controls.assign(static_cast<std::size_t>(p.grid.intervals()), ControlInput{});
  return t;
}

/// Backward Euler defect residuals, 8 per interval.
inline Eigen::VectorXd defect_residuals(const Trajectory& t, const CollocationGrid& grid, const VehicleParams& p) {
  Eigen::VectorXd d(kStateDim * grid.intervals());
  for (int k = 0; k < grid.intervals(); ++k) {
    const StateVec<double> next = t.states[k + 1].to_vector();
    d.segment<kStateDim>(kStateDim * k) =
        next - t.states[k].to_vector() - grid.T[k] * dynamics<double>(next, t.controls[k].to_vector(), p);
  }
  return d;
}

/// Independent re-evaluation of the objective from a trajectory.
inline CostBreakdown evaluate_breakdown(const OcpProblem& p, const Trajectory& t) {
  CostBreakdown b;
  const CostWeights& w = p.weights;
  const int N = p.grid.intervals();
  for (int k = 0; k < N; ++k) {
    const double T = p.grid.T[k];
    const VehicleState& s = t.states[k + 1];
    const ControlInput& u = t.controls[k];
    b.state += T * state_cost(s.v, s.r, s.ux, s.delta_f, s.ax, w);
    b.control += T * control_cost(u.delta_f_rate, u.jx, w);
    if (w.specific == SpecificCost::collision_avoidance) b.specific += T * speed_cost(s.ux, w.u_des, w.w_speed);
  }
  for (const VehicleState& s : t.states) b.envelope += envelope_cost(s.x, s.y, p.envelope, w);
  const VehicleState& sf = t.states.back();
  if (w.specific == SpecificCost::racing) b.specific += w.w_go * (*p.cost_to_go)(sf.x, sf.y);
  if (w.specific == SpecificCost::offroad) {
    b.specific += w.w_terminal * terminal_cost_offroad(p.x0.x, sf.x, w.goal_x);
  }
  return b;
}

/// The transcribed NLP in scaled variables, in the form consumed by
/// InteriorPointSolver.
class OcpNlp {
 public:
  using Vec = Eigen::VectorXd;

  explicit OcpNlp(const OcpProblem& problem) : p_(problem) {
    p_.validate();
    N_ = p_.grid.intervals();
    const double us = p_.bounds.ux_max;
    state_scale_ << 100.0, 100.0, us, 1.0, 1.0, us, 1.0, 10.0;
    control_scale_ << 1.0, 10.0;
    var_scale_.resize(n());
    for (int k = 0; k < N_; ++k) {
      var_scale_.segment<kControlDim>(kStageStride * k) = control_scale_;
      var_scale_.segment<kStateDim>(kStageStride * k + kControlDim) = state_scale_;
    }
    row_scale_.resize(m());
    for (int k = 0; k < N_; ++k) {
      row_scale_.segment<kStateDim>(kStageRows * k) = state_scale_;
      row_scale_[kStageRows * k + 8] = 1.0;
      row_scale_[kStageRows * k + 9] = 10.0;
    }
  }

  const OcpProblem& problem() const { return p_; }
  int n() const { return kStageStride * N_; }
  int m() const { return kStageRows * N_; }
  const Vec& variable_scale() const { return var_scale_; }
  const Vec& row_scale() const { return row_scale_; }

  static int free_state(int j) { return kStageStride * (j - 1) + kControlDim; }
  static int free_control(int k) { return kStageStride * k; }

  void bounds(Vec& xl, Vec& xu, Vec& gl, Vec& gu) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const LinearBounds& b = p_.bounds;
    StateVec<double> sl, su;
    sl << -inf, -inf, b.v_min, b.r_min, -inf, b.ux_min, b.delta_min, b.ax_min;
    su << inf, inf, b.v_max, b.r_max, inf, b.ux_max, b.delta_max, b.ax_max;
    ControlVec<double> ul(b.delta_rate_min, b.jx_min), uu(b.delta_rate_max, b.jx_max);
    xl.resize(n());
    xu.resize(n());
    for (int k = 0; k < N_; ++k) {
      xl.segment<kControlDim>(free_control(k)) = ul.cwiseQuotient(control_scale_);
      xu.segment<kControlDim>(free_control(k)) = uu.cwiseQuotient(control_scale_);
      xl.segment<kStateDim>(free_state(k + 1)) = sl.cwiseQuotient(state_scale_);
      xu.segment<kStateDim>(free_state(k + 1)) = su.cwiseQuotient(state_scale_);
    }
    gl = Vec::Zero(m());
    gu = Vec::Zero(m());
    for (int k = 0; k < N_; ++k) {
      gl[kStageRows * k + 8] = -inf;
      gu[kStageRows * k + 8] = -(p_.delta_strict + p_.envelope_margin);
      gl[kStageRows * k + 9] = -inf;
      gu[kStageRows * k + 9] = 0.0;
    }
  }

  /// Scaled free vector of a full-layout trajectory (xi_0 ignored).
  Vec scale_in(const Trajectory& t) const {
    Vec z(n());
    for (int k = 0; k < N_; ++k) {
      z.segment<kControlDim>(free_control(k)) = t.controls[k].to_vector().cwiseQuotient(control_scale_);
      z.segment<kStateDim>(free_state(k + 1)) = t.states[k + 1].to_vector().cwiseQuotient(state_scale_);
    }
    return z;
  }

  Trajectory trajectory(const Vec& z) const {
    Trajectory t;
    t.states.push_back(p_.x0);
    for (int k = 0; k < N_; ++k) {
      t.states.push_back(
          VehicleState::from_vector(z.segment<kStateDim>(free_state(k + 1)).cwiseProduct(state_scale_)));
      t.controls.push_back(
          ControlInput::from_vector(z.segment<kControlDim>(free_control(k)).cwiseProduct(control_scale_)));
    }
    return t;
  }

  double objective(const Vec& z) const { return evaluate_breakdown(p_, trajectory(z)).total(); }

  void constraints(const Vec& z, Vec& c) const {
    const Trajectory t = trajectory(z);
    c.resize(m());
    const Vec d = defect_residuals(t, p_.grid, p_.params);
    for (int k = 0; k < N_; ++k) {
      const VehicleState& s = t.states[k + 1];
      c.segment<kStateDim>(kStageRows * k) = d.segment<kStateDim>(kStateDim * k).cwiseQuotient(state_scale_);
      c[kStageRows * k + 8] = p_.envelope.constraint(s.x, s.y);
      c[kStageRows * k + 9] = power_limit_residual(s.ux, s.ax, p_.bounds.p_a, p_.bounds.p_b) / 10.0;
    }
  }

  void gradient(const Vec& z, Vec& g) const {
    const Cache& c = cache(z);
    const Trajectory& t = c.traj;
    const CostWeights& w = p_.weights;
    g = Vec::Zero(n());
    for (int k = 0; k < N_; ++k) {
      const int j = k + 1;
      const PointDerivs& pd = c.points[k];
      const int bs = free_state(j);
      for (int a = 0; a < 6; ++a) g[bs + 2 + a] += pd.stage.d[a];
      g[bs + kX] += pd.cost_xy.d[0];
      g[bs + kY] += pd.cost_xy.d[1];
      const double T = p_.grid.T[k];
      const ControlInput& u = t.controls[k];
      g[free_control(k) + kDeltaRate] += T * 2.0 * w.w_delta_f_rate * u.delta_f_rate;
      g[free_control(k) + kJerk] += T * 2.0 * w.w_jx * u.jx;
    }
    g = g.cwiseProduct(var_scale_);
  }

  void jacobian(const Vec& z, std::vector<Triplet>& J) const {
    const Cache& c = cache(z);
    J.reserve(J.size() + static_cast<std::size_t>(N_) * 72);
    for (int k = 0; k < N_; ++k) {
      const int row = kStageRows * k;
      const int bs = free_state(k + 1);
      const double T = p_.grid.T[k];
      const PointDerivs& pd = c.points[k];
      auto put = [&](int r, int col, double v) {
        J.emplace_back(r, col, v * var_scale_[col] / row_scale_[r]);
      };
      for (int i = 0; i < 6; ++i) {
        for (int a = 0; a < kStateDim; ++a) {
          const double df = a >= 2 ? pd.drift[i].d[a - 2] : 0.0;
          put(row + i, bs + a, (i == a ? 1.0 : 0.0) - T * df);
        }
      }
      put(row + kDelta, bs + kDelta, 1.0);
      put(row + kAx, bs + kAx, 1.0);
      if (k > 0) {
        const int prev = free_state(k);
        for (int i = 0; i < kStateDim; ++i) put(row + i, prev + i, -1.0);
      }
      put(row + kDelta, free_control(k) + kDeltaRate, -T);
      put(row + kAx, free_control(k) + kJerk, -T);
      put(row + 8, bs + kX, pd.g_env.d[0]);
      put(row + 8, bs + kY, pd.g_env.d[1]);
      put(row + 9, bs + kUx, p_.bounds.p_a);
      put(row + 9, bs + kAx, 1.0);
    }
  }

  /// With `convexify` each per-point block is replaced by its spectral absolute value.
  void hessian(const Vec& z, double sigma, const Vec& lambda, std::vector<Triplet>& H, bool convexify = false) const {
    const Cache& c = cache(z);
    const CostWeights& w = p_.weights;
    H.reserve(H.size() + static_cast<std::size_t>(N_) * 39);
    for (int k = 0; k < N_; ++k) {
      const int row = kStageRows * k;
      const int bs = free_state(k + 1);
      const double T = p_.grid.T[k];
      const PointDerivs& pd = c.points[k];
      Eigen::Matrix<double, kStateDim, kStateDim> h = Eigen::Matrix<double, kStateDim, kStateDim>::Zero();
      Eigen::Matrix<double, 6, 6> h6 = sigma * pd.stage.h;
      for (int i = 0; i < 6; ++i) {
        const double li = lambda[row + i] / row_scale_[row + i];
        h6 -= (li * T) * pd.drift[i].h;
      }
      h.block<6, 6>(2, 2) = h6;
      h.block<2, 2>(0, 0) = sigma * pd.cost_xy.h + (lambda[row + 8] / row_scale_[row + 8]) * pd.g_env.h;
      const auto sc = var_scale_.segment<kStateDim>(bs).asDiagonal();
      Eigen::Matrix<double, kStateDim, kStateDim> hs = sc * h * sc;
      if (convexify) {
        const Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, kStateDim, kStateDim>> es(hs);
        hs = es.eigenvectors() * es.eigenvalues().cwiseAbs().asDiagonal() * es.eigenvectors().transpose();
      }
      for (int a = 0; a < kStateDim; ++a) {
        for (int b = 0; b <= a; ++b) H.emplace_back(bs + a, bs + b, hs(a, b));
      }
      const int bu = free_control(k);
      H.emplace_back(bu, bu, sigma * T * 2.0 * w.w_delta_f_rate * var_scale_[bu] * var_scale_[bu]);
      H.emplace_back(bu + 1, bu + 1, sigma * T * 2.0 * w.w_jx * var_scale_[bu + 1] * var_scale_[bu + 1]);
    }
  }

 private:
  using J6 = Jet<6>;
  using J2 = Jet<2>;

  struct PointDerivs {
    J6 stage;                 ///< T_k (state cost + speed cost) over (v, r, psi, ux, delta, ax)
    std::array<J6, 6> drift;  ///< nonlinear dynamics rows
    J2 g_env;                 ///< envelope constraint over (x, y)
    J2 cost_xy;               ///< envelope cost plus terminal terms over (x, y)
  };
  struct Cache {
    Vec z;
    Trajectory traj;
    std::vector<PointDerivs> points;
  };

  const Cache& cache(const Vec& z) const {
    if (cache_.z.size() == z.size() && cache_.z == z) return cache_;
    cache_.z = z;
    cache_.traj = trajectory(z);
    cache_.points.resize(static_cast<std::size_t>(N_));
    const CostWeights& w = p_.weights;
    for (int k = 0; k < N_; ++k) {
      const int j = k + 1;
      const VehicleState& s = cache_.traj.states[j];
      PointDerivs& pd = cache_.points[k];
      const J6 v = J6::variable(s.v, 0);
      const J6 r = J6::variable(s.r, 1);
      const J6 psi = J6::variable(s.psi, 2);
      const J6 ux = J6::variable(s.ux, 3);
      const J6 del = J6::variable(s.delta_f, 4);
      const J6 ax = J6::variable(s.ax, 5);
      const double T = p_.grid.T[k];
      pd.stage = T * state_cost(v, r, ux, del, ax, w);
      if (w.specific == SpecificCost::collision_avoidance) pd.stage += T * speed_cost(ux, w.u_des, w.w_speed);
      pd.drift = drift_terms(v, r, psi, ux, del, ax, p_.params);
      const J2 x = J2::variable(s.x, 0);
      const J2 y = J2::variable(s.y, 1);
      pd.g_env = p_.envelope.constraint(x, y);
      pd.cost_xy = envelope_cost(pd.g_env, w.w_envelope, w.theta_hp, w.g_sm);
      if (j == N_) {
        if (w.specific == SpecificCost::racing) pd.cost_xy += w.w_go * (*p_.cost_to_go)(x, y);
        if (w.specific == SpecificCost::offroad) {
          pd.cost_xy += w.w_terminal * terminal_cost_offroad(p_.x0.x, x, w.goal_x);
        }
      }
    }
    return cache_;
  }

  OcpProblem p_;
  int N_ = 0;
  StateVec<double> state_scale_;
  ControlVec<double> control_scale_;
  Vec var_scale_, row_scale_;
  mutable Cache cache_;
};

}  // namespace envmpc
