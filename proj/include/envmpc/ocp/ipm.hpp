#pragma once

// Primal-dual interior-point method for
//
//   min f(x)  s.t.  gl <= c(x) <= gu,  xl <= x <= xu
//
// with slacks on the inequality rows, a log barrier on all finite bounds,
// a filter line search and sparse LDL^T solves of the reduced KKT system.
// The signs of D give the inertia; the primal regularization is raised until
// it is (n, m, 0). The problem type supplies values, a fixed-pattern Jacobian
// and the Lagrangian Hessian (lower triangle) as triplets:
//
//   int n() const;  int m() const;
//   void bounds(VectorXd& xl, VectorXd& xu, VectorXd& gl, VectorXd& gu) const;
//   double objective(const VectorXd& x) const;
//   void constraints(const VectorXd& x, VectorXd& c) const;
//   void gradient(const VectorXd& x, VectorXd& g) const;
//   void jacobian(const VectorXd& x, std::vector<Triplet>& J) const;
//   void hessian(const VectorXd& x, double sigma, const VectorXd& lambda,
//                std::vector<Triplet>& H) const;       // sigma*f + lambda^T c
//
// A problem may also accept a trailing `bool convexify` in hessian(); that
// positive semidefinite variant is used when the exact Hessian has the wrong
// inertia, before any primal regularization is added.
//
// Infinite bounds are +-infinity.

#include <Eigen/Core>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace envmpc {

using Triplet = Eigen::Triplet<double>;

enum class SolveStatus {
  converged,
  max_iter,
  timeout,
  infeasible,
};

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::timeout: return "timeout";
    case SolveStatus::infeasible: return "infeasible";
  }
  return "?";
}

struct IpmOptions {
  double tol = 1e-6;            ///< scaled overall KKT error
  double constr_viol_tol = 1e-8;  ///< absolute primal infeasibility (problem units)
  double compl_tol = 1e-6;
  int max_iter = 100;
  double max_wall_ms = std::numeric_limits<double>::infinity();
  double mu_init = 0.1;
  double mu_min = 1e-11;
  double kappa_mu = 0.2;
  double theta_mu = 1.5;
  double kappa_eps = 10.0;
  double tau_min = 0.99;
  double bound_push = 1e-2;
  double bound_frac = 1e-2;
  double warm_bound_push = 1e-8;  ///< interior push applied to a warm-start primal point
  double delta_c = 1e-9;
  double max_grad_scale = 100.0;  ///< objective scaled so the initial gradient is at most this
  bool scale_objective = true;
  int max_soc = 2;
  double theta_growth = 2.0;  ///< trial theta <= this * max(theta, theta_min)
  bool convexify = true;      ///< try the problem's convexified Hessian before raising delta_w
  int print_level = 0;  ///< > 0 prints one line per iteration to stderr
};

/// Primal and dual iterate; also the warm-start carrier.
struct IpmIterate {
  Eigen::VectorXd x, s, lambda, zl, zu, vl, vu;
  double mu = 0.1;
  double obj_scale = 1.0;
  bool valid() const { return x.size() > 0; }
};

struct IpmResult {
  SolveStatus status = SolveStatus::infeasible;
  IpmIterate it;
  int iterations = 0;
  double objective = 0.0;
  double kkt_error = 0.0;
  double primal_inf = 0.0;
  double dual_inf = 0.0;
  double complementarity = 0.0;
  double wall_ms = 0.0;
  std::string message;
};

namespace detail {

inline bool finite_bound(double b) { return std::isfinite(b); }

}  // namespace detail

template <typename Problem>
class InteriorPointSolver {
 public:
  using Vec = Eigen::VectorXd;
  using SpMat = Eigen::SparseMatrix<double>;

  InteriorPointSolver(const Problem& prob, IpmOptions opt = {}) : p_(prob), opt_(opt) {
    n_ = p_.n();
    m_ = p_.m();
    p_.bounds(xl_, xu_, gl_, gu_);
    for (int j = 0; j < m_; ++j) {
      if (gl_[j] == gu_[j]) {
        eq_.push_back(j);
      } else {
        slack_of_row_.push_back(j);
      }
    }
    row_slack_.assign(m_, -1);
    for (std::size_t k = 0; k < slack_of_row_.size(); ++k) row_slack_[slack_of_row_[k]] = static_cast<int>(k);
    ns_ = static_cast<int>(slack_of_row_.size());
    sl_.resize(ns_);
    su_.resize(ns_);
    for (int k = 0; k < ns_; ++k) {
      sl_[k] = gl_[slack_of_row_[k]];
      su_[k] = gu_[slack_of_row_[k]];
    }
  }

  IpmResult solve(const Vec& x_guess, const IpmIterate* warm = nullptr) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    auto elapsed_ms = [&] { return std::chrono::duration<double, std::milli>(clock::now() - t0).count(); };

    IpmResult res;
    IpmIterate& it = res.it;
    initialize(x_guess, warm, it);
    mu_ = it.mu;
    filter_.clear();
    last_alpha_ = 0.0;
    last_trials_ = 0;

    if (!evaluate_all(it)) {
      res.status = SolveStatus::infeasible;
      res.message = "non-finite function values at the initial point";
      res.wall_ms = elapsed_ms();
      return res;
    }
    theta_max_ = 1e4 * std::max(1.0, theta(c_res_));

    double delta_w_last = 0.0;
    for (int iter = 0;; ++iter) {
      res.iterations = iter;
      const Errors e = errors(it, 0.0);
      res.kkt_error = e.total;
      res.primal_inf = e.primal_abs;
      res.dual_inf = e.dual;
      res.complementarity = e.compl_;
      res.objective = f_ / it.obj_scale;
      if (e.total <= opt_.tol && e.primal_abs <= opt_.constr_viol_tol && e.compl_ <= opt_.compl_tol) {
        res.status = SolveStatus::converged;
        break;
      }
      if (opt_.print_level > 0) {
        std::fprintf(stderr, "%3d f=% .6e inf_pr=%.2e inf_du=%.2e compl=%.2e mu=%.1e dw=%.1e%s a=%.2e ls=%d\n", iter,
                     f_, e.primal_abs, e.dual, e.compl_, mu_, delta_w_cur_, convexified_ ? " cvx" : "", last_alpha_,
                     last_trials_);
        if (opt_.print_level > 2) {
          Eigen::Index ip = 0, id = 0;
          c_res_.cwiseAbs().maxCoeff(&ip);
          (grad_ + J_.transpose() * it.lambda - it.zl + it.zu).cwiseAbs().maxCoeff(&id);
          std::fprintf(stderr, "    worst row %ld  worst dual var %ld\n", static_cast<long>(ip), static_cast<long>(id));
        }
      }
      if (iter >= opt_.max_iter) {
        res.status = SolveStatus::max_iter;
        break;
      }
      if (elapsed_ms() > opt_.max_wall_ms) {
        res.status = SolveStatus::timeout;
        break;
      }

      // Monotone barrier update.
      for (int k = 0; k < 5; ++k) {
        const Errors em = errors(it, mu_);
        if (em.total > opt_.kappa_eps * mu_ || mu_ <= opt_.mu_min) break;
        mu_ = std::max(opt_.mu_min, std::min(opt_.kappa_mu * mu_, std::pow(mu_, opt_.theta_mu)));
        filter_.clear();
      }
      it.mu = mu_;

      Direction d;
      if (!compute_direction(it, delta_w_last, d)) {
        res.status = SolveStatus::infeasible;
        res.message = "KKT system could not be factorized";
        break;
      }
      if (!line_search(it, d)) {
        if (!feasibility_step(it)) {
          res.status = SolveStatus::infeasible;
          res.message = "line search and feasibility restoration failed";
          break;
        }
      }
      if (!evaluate_derivatives(it)) {
        res.status = SolveStatus::infeasible;
        res.message = "non-finite derivatives";
        break;
      }
    }
    res.wall_ms = elapsed_ms();
    return res;
  }

 private:
  struct Direction {
    Vec dx, ds, dl, dzl, dzu, dvl, dvu;
  };
  struct Errors {
    double total, dual, primal, primal_abs, compl_;
  };

  static constexpr double kInf = std::numeric_limits<double>::infinity();

  void initialize(const Vec& guess, const IpmIterate* warm, IpmIterate& it) {
    const bool use_warm = warm != nullptr && warm->valid() && warm->x.size() == n_ && warm->s.size() == ns_;
    const double push = use_warm ? opt_.warm_bound_push : opt_.bound_push;
    it.x = use_warm ? warm->x : guess;
    for (int i = 0; i < n_; ++i) {
      it.x[i] = push_inside(it.x[i], xl_[i], xu_[i], push, use_warm ? push : opt_.bound_frac);
    }
    Vec c(m_);
    p_.constraints(it.x, c);
    it.s.resize(ns_);
    for (int k = 0; k < ns_; ++k) {
      const double v = use_warm ? warm->s[k] : c[slack_of_row_[k]];
      it.s[k] = push_inside(v, sl_[k], su_[k], push, use_warm ? push : opt_.bound_frac);
    }
    it.mu = use_warm ? std::max(warm->mu, opt_.mu_min) : opt_.mu_init;
    it.obj_scale = 1.0;
    if (opt_.scale_objective) {
      Vec g(n_);
      p_.gradient(it.x, g);
      const double gmax = g.lpNorm<Eigen::Infinity>();
      if (std::isfinite(gmax) && gmax > opt_.max_grad_scale) it.obj_scale = opt_.max_grad_scale / gmax;
    }
    const double mult_floor = use_warm ? 1e-3 * it.mu : 1.0;
    auto init_mult = [&](Vec& z, const Vec* wz, int size, auto has_bound) {
      z = Vec::Zero(size);
      for (int i = 0; i < size; ++i) {
        if (!has_bound(i)) continue;
        z[i] = use_warm && wz != nullptr ? std::max((*wz)[i], mult_floor) : 1.0;
      }
    };
    init_mult(it.zl, use_warm ? &warm->zl : nullptr, n_, [&](int i) { return detail::finite_bound(xl_[i]); });
    init_mult(it.zu, use_warm ? &warm->zu : nullptr, n_, [&](int i) { return detail::finite_bound(xu_[i]); });
    init_mult(it.vl, use_warm ? &warm->vl : nullptr, ns_, [&](int k) { return detail::finite_bound(sl_[k]); });
    init_mult(it.vu, use_warm ? &warm->vu : nullptr, ns_, [&](int k) { return detail::finite_bound(su_[k]); });
    if (use_warm && warm->lambda.size() == m_) {
      it.lambda = warm->lambda;
      if (warm->obj_scale > 0.0 && it.obj_scale != warm->obj_scale) {
        const double r = it.obj_scale / warm->obj_scale;
        it.lambda *= r;
        it.zl *= r;
        it.zu *= r;
        it.vl *= r;
        it.vu *= r;
      }
    } else {
      it.lambda = Vec::Zero(m_);
    }
  }

  static double push_inside(double v, double lo, double hi, double k1, double k2) {
    const bool hl = std::isfinite(lo);
    const bool hu = std::isfinite(hi);
    if (hl && hu) {
      const double pl = std::min(k1 * std::max(1.0, std::abs(lo)), k2 * (hi - lo));
      const double pu = std::min(k1 * std::max(1.0, std::abs(hi)), k2 * (hi - lo));
      return std::clamp(v, lo + pl, hi - pu);
    }
    if (hl) return std::max(v, lo + k1 * std::max(1.0, std::abs(lo)));
    if (hu) return std::min(v, hi - k1 * std::max(1.0, std::abs(hi)));
    return v;
  }

  // --- evaluation ---------------------------------------------------------

  bool evaluate_values(const Vec& x, const Vec& s, double obj_scale, double& f, Vec& c, Vec& cres) const {
    try {
      f = obj_scale * p_.objective(x);
      c.resize(m_);
      p_.constraints(x, c);
    } catch (const std::exception&) {
      return false;
    }
    if (!std::isfinite(f) || !c.allFinite()) return false;
    cres.resize(m_);
    for (int j = 0; j < m_; ++j) {
      cres[j] = row_slack_[j] < 0 ? c[j] - gl_[j] : c[j] - s[row_slack_[j]];
    }
    return true;
  }

  bool evaluate_all(IpmIterate& it) {
    if (!evaluate_values(it.x, it.s, it.obj_scale, f_, c_, c_res_)) return false;
    return evaluate_derivatives(it);
  }

  bool evaluate_derivatives(IpmIterate& it) {
    grad_.resize(n_);
    p_.gradient(it.x, grad_);
    grad_ *= it.obj_scale;
    jac_trip_.clear();
    p_.jacobian(it.x, jac_trip_);
    J_.resize(m_, n_);
    J_.setFromTriplets(jac_trip_.begin(), jac_trip_.end());
    return grad_.allFinite() && std::all_of(jac_trip_.begin(), jac_trip_.end(),
                                             [](const Triplet& t) { return std::isfinite(t.value()); });
  }

  // Barrier objective.
  double phi(const Vec& x, const Vec& s, double f) const {
    double v = f;
    for (int i = 0; i < n_; ++i) {
      if (std::isfinite(xl_[i])) v -= mu_ * std::log(x[i] - xl_[i]);
      if (std::isfinite(xu_[i])) v -= mu_ * std::log(xu_[i] - x[i]);
    }
    for (int k = 0; k < ns_; ++k) {
      if (std::isfinite(sl_[k])) v -= mu_ * std::log(s[k] - sl_[k]);
      if (std::isfinite(su_[k])) v -= mu_ * std::log(su_[k] - s[k]);
    }
    return v;
  }

  static double theta(const Vec& cres) { return cres.lpNorm<1>(); }

  Errors errors(const IpmIterate& it, double mu) const {
    Vec gl = grad_ + J_.transpose() * it.lambda - it.zl + it.zu;
    Vec gs(ns_);
    for (int k = 0; k < ns_; ++k) gs[k] = -it.lambda[slack_of_row_[k]] - it.vl[k] + it.vu[k];
    double compl_ = 0.0;
    double zsum = 0.0;
    int zcount = 0;
    for (int i = 0; i < n_; ++i) {
      if (std::isfinite(xl_[i])) {
        compl_ = std::max(compl_, std::abs((it.x[i] - xl_[i]) * it.zl[i] - mu));
        zsum += std::abs(it.zl[i]);
        ++zcount;
      }
      if (std::isfinite(xu_[i])) {
        compl_ = std::max(compl_, std::abs((xu_[i] - it.x[i]) * it.zu[i] - mu));
        zsum += std::abs(it.zu[i]);
        ++zcount;
      }
    }
    for (int k = 0; k < ns_; ++k) {
      if (std::isfinite(sl_[k])) {
        compl_ = std::max(compl_, std::abs((it.s[k] - sl_[k]) * it.vl[k] - mu));
        zsum += std::abs(it.vl[k]);
        ++zcount;
      }
      if (std::isfinite(su_[k])) {
        compl_ = std::max(compl_, std::abs((su_[k] - it.s[k]) * it.vu[k] - mu));
        zsum += std::abs(it.vu[k]);
        ++zcount;
      }
    }
    const double smax = 100.0;
    const double sd = std::max(smax, (it.lambda.lpNorm<1>() + zsum) / std::max(1, m_ + zcount)) / smax;
    const double sc = std::max(smax, zsum / std::max(1, zcount)) / smax;
    Errors e;
    e.dual = std::max(gl.lpNorm<Eigen::Infinity>(), ns_ > 0 ? gs.lpNorm<Eigen::Infinity>() : 0.0) / sd;
    e.primal_abs = c_res_.size() > 0 ? c_res_.lpNorm<Eigen::Infinity>() : 0.0;
    e.primal = e.primal_abs;
    e.compl_ = compl_ / sc;
    e.total = std::max({e.dual, e.primal, e.compl_});
    return e;
  }

  // --- search direction ---------------------------------------------------

  bool factorize(double delta_w, double delta_c, const Vec& sigma_x, const Vec& sigma_s) {
    const int N = n_ + m_;
    std::vector<Triplet> K;
    K.reserve(2 * (hess_trip_.size() + jac_trip_.size()) + static_cast<std::size_t>(N));
    for (const Triplet& t : hess_trip_) {
      K.push_back(t);
      if (t.row() != t.col()) K.emplace_back(t.col(), t.row(), t.value());
    }
    for (int i = 0; i < n_; ++i) K.emplace_back(i, i, sigma_x[i] + delta_w);
    for (const Triplet& t : jac_trip_) {
      K.emplace_back(n_ + t.row(), t.col(), t.value());
      K.emplace_back(t.col(), n_ + t.row(), t.value());
    }
    for (int j = 0; j < m_; ++j) {
      const int k = row_slack_[j];
      const double d = k < 0 ? delta_c : 1.0 / (sigma_s[k] + delta_w) + delta_c;
      K.emplace_back(n_ + j, n_ + j, -d);
    }
    kkt_.resize(N, N);
    kkt_.setFromTriplets(K.begin(), K.end());
    if (!pattern_ready_) {
      ldlt_.analyzePattern(kkt_);
      pattern_ready_ = true;
    }
    lu_ready_ = false;
    ldlt_.factorize(kkt_);
    negative_ = 0;
    zero_ = 0;
    if (ldlt_.info() != Eigen::Success) return false;
    const Vec& D = ldlt_.vectorD();
    for (Eigen::Index i = 0; i < D.size(); ++i) {
      if (!std::isfinite(D[i])) return false;
      if (D[i] == 0.0) {
        ++zero_;
      } else if (D[i] < 0.0) {
        ++negative_;
      }
    }
    if (opt_.print_level > 1) {
      std::fprintf(stderr, "    inertia n %d m %d neg %d zero %d dw %.1e dc %.1e\n", n_, m_, negative_, zero_, delta_w,
                   delta_c);
    }
    return true;
  }

  bool inertia_correct() const { return zero_ == 0 && negative_ == m_; }

  // LDL^T solve with one refinement step; falls back to LU when the
  // factorization is too inaccurate.
  Vec solve_kkt(const Vec& rhs) {
    Vec sol = ldlt_.solve(rhs);
    Vec r = rhs - kkt_ * sol;
    sol += ldlt_.solve(r);
    r = rhs - kkt_ * sol;
    const double scale = 1.0 + rhs.lpNorm<Eigen::Infinity>();
    if (!sol.allFinite() || !(r.lpNorm<Eigen::Infinity>() <= 1e-9 * scale)) {
      if (!lu_ready_) {
        lu_.compute(kkt_);
        lu_ready_ = lu_.info() == Eigen::Success;
      }
      if (lu_ready_) {
        Vec alt = lu_.solve(rhs);
        alt += lu_.solve(Vec(rhs - kkt_ * alt));
        const Vec ra = rhs - kkt_ * alt;
        if (alt.allFinite() && (!sol.allFinite() || ra.lpNorm<Eigen::Infinity>() < r.lpNorm<Eigen::Infinity>())) {
          sol = alt;
          r = ra;
        }
      }
    }
    if (opt_.print_level > 1) {
      std::fprintf(stderr, "    kkt residual %.2e (|rhs| %.2e)\n", r.lpNorm<Eigen::Infinity>(), scale - 1.0);
    }
    return sol;
  }

  void barrier_sigmas(const IpmIterate& it, Vec& sigma_x, Vec& sigma_s) const {
    sigma_x = Vec::Zero(n_);
    for (int i = 0; i < n_; ++i) {
      if (std::isfinite(xl_[i])) sigma_x[i] += it.zl[i] / (it.x[i] - xl_[i]);
      if (std::isfinite(xu_[i])) sigma_x[i] += it.zu[i] / (xu_[i] - it.x[i]);
    }
    sigma_s = Vec::Zero(ns_);
    for (int k = 0; k < ns_; ++k) {
      if (std::isfinite(sl_[k])) sigma_s[k] += it.vl[k] / (it.s[k] - sl_[k]);
      if (std::isfinite(su_[k])) sigma_s[k] += it.vu[k] / (su_[k] - it.s[k]);
    }
  }

  // Reduced right-hand sides r~x, r~s of the barrier problem.
  void barrier_residuals(const IpmIterate& it, Vec& rx, Vec& rs) const {
    rx = grad_ + J_.transpose() * it.lambda;
    for (int i = 0; i < n_; ++i) {
      if (std::isfinite(xl_[i])) rx[i] -= mu_ / (it.x[i] - xl_[i]);
      if (std::isfinite(xu_[i])) rx[i] += mu_ / (xu_[i] - it.x[i]);
    }
    rs.resize(ns_);
    for (int k = 0; k < ns_; ++k) {
      rs[k] = -it.lambda[slack_of_row_[k]];
      if (std::isfinite(sl_[k])) rs[k] -= mu_ / (it.s[k] - sl_[k]);
      if (std::isfinite(su_[k])) rs[k] += mu_ / (su_[k] - it.s[k]);
    }
  }

  bool compute_direction(const IpmIterate& it, double& delta_w_last, Direction& d) {
    hess_trip_.clear();
    p_.hessian(it.x, it.obj_scale, it.lambda, hess_trip_);
    if (!std::all_of(hess_trip_.begin(), hess_trip_.end(), [](const Triplet& t) { return std::isfinite(t.value()); })) {
      return false;
    }
    barrier_sigmas(it, sigma_x_, sigma_s_);
    Vec rx, rs;
    barrier_residuals(it, rx, rs);

    double delta_w = 0.0;
    double delta_c = opt_.delta_c;
    convexified_ = false;
    for (int attempt = 0; attempt < 60; ++attempt) {
      const bool factored = factorize(delta_w, delta_c, sigma_x_, sigma_s_);
      if ((!factored || zero_ > 0) && delta_c < 1e-4) {
        delta_c = std::max(1e-8, delta_c * 100.0);
        continue;
      }
      if (factored && inertia_correct()) {
        Vec rhs(n_ + m_);
        rhs.head(n_) = -rx;
        for (int j = 0; j < m_; ++j) {
          const int k = row_slack_[j];
          rhs[n_ + j] = k < 0 ? -c_res_[j] : -c_res_[j] - rs[k] / (sigma_s_[k] + delta_w);
        }
        const Vec sol = solve_kkt(rhs);
        if (sol.allFinite()) {
          d.dx = sol.head(n_);
          d.dl = sol.tail(m_);
          recover_bound_steps(it, d, rs, delta_w);
          if (delta_w > 0.0) delta_w_last = delta_w;
          delta_w_cur_ = delta_w;
          delta_c_cur_ = delta_c;
          return true;
        }
      }
      if constexpr (requires { p_.hessian(it.x, it.obj_scale, it.lambda, hess_trip_, true); }) {
        if (factored && opt_.convexify && !convexified_) {
          hess_trip_.clear();
          p_.hessian(it.x, it.obj_scale, it.lambda, hess_trip_, true);
          convexified_ = true;
          continue;
        }
      }
      if (delta_w == 0.0) {
        delta_w = delta_w_last == 0.0 ? 1e-4 : std::max(1e-20, delta_w_last / 3.0);
      } else {
        delta_w *= delta_w_last == 0.0 ? 100.0 : 8.0;
      }
      if (delta_w > 1e40) break;
    }
    return false;
  }

  void recover_bound_steps(const IpmIterate& it, Direction& d, const Vec& rs, double delta_w) const {
    d.ds.resize(ns_);
    for (int k = 0; k < ns_; ++k) {
      d.ds[k] = (d.dl[slack_of_row_[k]] - rs[k]) / (sigma_s_[k] + delta_w);
    }
    d.dzl = Vec::Zero(n_);
    d.dzu = Vec::Zero(n_);
    for (int i = 0; i < n_; ++i) {
      if (std::isfinite(xl_[i])) {
        const double sl = it.x[i] - xl_[i];
        d.dzl[i] = mu_ / sl - it.zl[i] - it.zl[i] / sl * d.dx[i];
      }
      if (std::isfinite(xu_[i])) {
        const double su = xu_[i] - it.x[i];
        d.dzu[i] = mu_ / su - it.zu[i] + it.zu[i] / su * d.dx[i];
      }
    }
    d.dvl = Vec::Zero(ns_);
    d.dvu = Vec::Zero(ns_);
    for (int k = 0; k < ns_; ++k) {
      if (std::isfinite(sl_[k])) {
        const double sl = it.s[k] - sl_[k];
        d.dvl[k] = mu_ / sl - it.vl[k] - it.vl[k] / sl * d.ds[k];
      }
      if (std::isfinite(su_[k])) {
        const double su = su_[k] - it.s[k];
        d.dvu[k] = mu_ / su - it.vu[k] + it.vu[k] / su * d.ds[k];
      }
    }
  }

  // Largest step in (0, 1] keeping v + a dv >= (1 - tau) v for positive v.
  static double max_step_positive(const Vec& v, const Vec& dv, double tau) {
    double a = 1.0;
    for (int i = 0; i < v.size(); ++i) {
      if (dv[i] < 0.0 && v[i] > 0.0) a = std::min(a, -tau * v[i] / dv[i]);
    }
    return a;
  }

  double max_primal_step(const IpmIterate& it, const Direction& d, double tau) const {
    double a = 1.0;
    for (int i = 0; i < n_; ++i) {
      if (std::isfinite(xl_[i]) && d.dx[i] < 0.0) a = std::min(a, -tau * (it.x[i] - xl_[i]) / d.dx[i]);
      if (std::isfinite(xu_[i]) && d.dx[i] > 0.0) a = std::min(a, tau * (xu_[i] - it.x[i]) / d.dx[i]);
    }
    for (int k = 0; k < ns_; ++k) {
      if (std::isfinite(sl_[k]) && d.ds[k] < 0.0) a = std::min(a, -tau * (it.s[k] - sl_[k]) / d.ds[k]);
      if (std::isfinite(su_[k]) && d.ds[k] > 0.0) a = std::min(a, tau * (su_[k] - it.s[k]) / d.ds[k]);
    }
    return a;
  }

  bool filter_acceptable(double th, double ph) const {
    for (const auto& [ft, fp] : filter_) {
      if (th >= ft && ph >= fp) return false;
    }
    return true;
  }

  // Directional derivative of the barrier objective along (dx, ds).
  double barrier_slope(const IpmIterate& it, const Direction& d) const {
    double v = grad_.dot(d.dx);
    for (int i = 0; i < n_; ++i) {
      if (std::isfinite(xl_[i])) v -= mu_ * d.dx[i] / (it.x[i] - xl_[i]);
      if (std::isfinite(xu_[i])) v += mu_ * d.dx[i] / (xu_[i] - it.x[i]);
    }
    for (int k = 0; k < ns_; ++k) {
      if (std::isfinite(sl_[k])) v -= mu_ * d.ds[k] / (it.s[k] - sl_[k]);
      if (std::isfinite(su_[k])) v += mu_ * d.ds[k] / (su_[k] - it.s[k]);
    }
    return v;
  }

  void accept(IpmIterate& it, const Direction& d, double alpha, const Vec& x, const Vec& s, double f, const Vec& c,
              const Vec& cres) {
    const double tau = std::max(opt_.tau_min, 1.0 - mu_);
    double az = std::min({max_step_positive(it.zl, d.dzl, tau), max_step_positive(it.zu, d.dzu, tau),
                          max_step_positive(it.vl, d.dvl, tau), max_step_positive(it.vu, d.dvu, tau)});
    it.x = x;
    it.s = s;
    it.lambda += alpha * d.dl;
    it.zl += az * d.dzl;
    it.zu += az * d.dzu;
    it.vl += az * d.dvl;
    it.vu += az * d.dvu;
    // Keep bound multipliers near the central path.
    const double ks = 1e10;
    for (int i = 0; i < n_; ++i) {
      if (std::isfinite(xl_[i])) {
        const double g = x[i] - xl_[i];
        it.zl[i] = std::clamp(it.zl[i], mu_ / (ks * g), ks * mu_ / g);
      } else {
        it.zl[i] = 0.0;
      }
      if (std::isfinite(xu_[i])) {
        const double g = xu_[i] - x[i];
        it.zu[i] = std::clamp(it.zu[i], mu_ / (ks * g), ks * mu_ / g);
      } else {
        it.zu[i] = 0.0;
      }
    }
    for (int k = 0; k < ns_; ++k) {
      if (std::isfinite(sl_[k])) {
        const double g = s[k] - sl_[k];
        it.vl[k] = std::clamp(it.vl[k], mu_ / (ks * g), ks * mu_ / g);
      } else {
        it.vl[k] = 0.0;
      }
      if (std::isfinite(su_[k])) {
        const double g = su_[k] - s[k];
        it.vu[k] = std::clamp(it.vu[k], mu_ / (ks * g), ks * mu_ / g);
      } else {
        it.vu[k] = 0.0;
      }
    }
    f_ = f;
    c_ = c;
    c_res_ = cres;
  }

  bool line_search(IpmIterate& it, const Direction& d) {
    const double tau = std::max(opt_.tau_min, 1.0 - mu_);
    const double amax = max_primal_step(it, d, tau);
    const double th0 = theta(c_res_);
    const double ph0 = phi(it.x, it.s, f_);
    const double slope = barrier_slope(it, d);
    constexpr double gamma_th = 1e-5, gamma_ph = 1e-8, eta = 1e-4, s_th = 1.1, s_ph = 2.3, delta = 1.0;
    const double th_min = 1e-4 * std::max(1.0, theta_max_ / 1e4);
    double alpha_min = gamma_th;
    if (slope < 0.0) {
      alpha_min = std::min(gamma_th, gamma_ph * th0 / -slope);
      if (th0 <= th_min) alpha_min = std::min(alpha_min, delta * std::pow(th0, s_th) / std::pow(-slope, s_ph));
    }
    alpha_min = std::max(0.05 * alpha_min, 1e-14);

    Vec x(n_), s(ns_), c, cres;
    double f = 0.0;
    double alpha = amax;
    for (int trial = 0; alpha >= alpha_min && trial < 60; ++trial, alpha *= 0.5) {
      x = it.x + alpha * d.dx;
      s = it.s + alpha * d.ds;
      const bool ok = evaluate_values(x, s, it.obj_scale, f, c, cres);
      if (ok) {
        const double th = theta(cres);
        const double ph = phi(x, s, f);
        if (std::isfinite(ph) && th <= theta_max_ && th <= opt_.theta_growth * std::max(th0, th_min) &&
            filter_acceptable(th, ph)) {
          const bool switching = slope < 0.0 && alpha * std::pow(-slope, s_ph) > delta * std::pow(th0, s_th);
          bool good = false;
          bool f_type = false;
          if (th0 <= th_min && switching) {
            good = ph <= ph0 + eta * alpha * slope;
            f_type = good;
          } else {
            good = th <= (1.0 - gamma_th) * th0 || ph <= ph0 - gamma_ph * th0;
          }
          if (good) {
            last_alpha_ = alpha;
            last_trials_ = trial;
            if (!f_type) filter_.emplace_back((1.0 - gamma_th) * th0, ph0 - gamma_ph * th0);
            accept(it, d, alpha, x, s, f, c, cres);
            return true;
          }
        }
        // Second-order correction on the first trial.
        if (trial == 0 && opt_.max_soc > 0 && std::isfinite(th) && th >= th0) {
          if (second_order_correction(it, amax, tau, th0, ph0, cres)) return true;
        }
      }
    }
    return false;
  }

  bool second_order_correction(IpmIterate& it, double alpha, double tau, double th0, double ph0,
                               Vec cres_trial) {
    constexpr double gamma_th = 1e-5, gamma_ph = 1e-8, kappa_soc = 0.99;
    Vec csoc = alpha * c_res_ + cres_trial;
    double th_old = th0;
    Vec rx, rs;
    barrier_residuals(it, rx, rs);
    for (int p = 0; p < opt_.max_soc; ++p) {
      Vec rhs(n_ + m_);
      rhs.head(n_) = -rx;
      for (int j = 0; j < m_; ++j) {
        const int k = row_slack_[j];
        rhs[n_ + j] = k < 0 ? -csoc[j] : -csoc[j] - rs[k] / (sigma_s_[k] + delta_w_cur_);
      }
      const Vec sol = solve_kkt(rhs);
      if (!sol.allFinite()) return false;
      Direction ds;
      ds.dx = sol.head(n_);
      ds.dl = sol.tail(m_);
      recover_bound_steps(it, ds, rs, delta_w_cur_);
      const double a = max_primal_step(it, ds, tau);
      Vec x = it.x + a * ds.dx;
      Vec s = it.s + a * ds.ds;
      double f = 0.0;
      Vec c, cres;
      if (!evaluate_values(x, s, it.obj_scale, f, c, cres)) return false;
      const double th = theta(cres);
      const double ph = phi(x, s, f);
      if (std::isfinite(ph) && th <= theta_max_ && filter_acceptable(th, ph) &&
          (th <= (1.0 - gamma_th) * th0 || ph <= ph0 - gamma_ph * th0)) {
        filter_.emplace_back((1.0 - gamma_th) * th0, ph0 - gamma_ph * th0);
        Direction scaled = ds;
        accept(it, scaled, a, x, s, f, c, cres);
        return true;
      }
      if (th > kappa_soc * th_old) return false;
      th_old = th;
      csoc = a * csoc + cres;
    }
    return false;
  }

  // Minimum-norm Gauss-Newton step on the constraint residual, used when the
  // filter line search stalls. Accepts any step that reduces theta.
  bool feasibility_step(IpmIterate& it) {
    hess_trip_.clear();
    Vec sx = sigma_x_;
    Vec ss = sigma_s_;
    bool ok = false;
    double dw = 1e-6;
    for (int k = 0; k < 20 && !ok; ++k, dw *= 10.0) ok = factorize(dw, std::max(opt_.delta_c, 1e-8), sx, ss);
    if (!ok) return false;
    Vec rhs = Vec::Zero(n_ + m_);
    for (int j = 0; j < m_; ++j) rhs[n_ + j] = -c_res_[j];
    const Vec sol = solve_kkt(rhs);
    Direction d;
    d.dx = sol.head(n_);
    d.dl = Vec::Zero(m_);
    Vec rs = Vec::Zero(ns_);
    d.ds.resize(ns_);
    for (int k = 0; k < ns_; ++k) d.ds[k] = sol[n_ + slack_of_row_[k]] / (sigma_s_[k] + dw);
    recover_bound_steps(it, d, rs, dw);
    for (int k = 0; k < ns_; ++k) d.ds[k] = sol[n_ + slack_of_row_[k]] / (sigma_s_[k] + dw);
    const double tau = std::max(opt_.tau_min, 1.0 - mu_);
    double alpha = max_primal_step(it, d, tau);
    const double th0 = theta(c_res_);
    for (int t = 0; t < 30; ++t, alpha *= 0.5) {
      Vec x = it.x + alpha * d.dx;
      Vec s = it.s + alpha * d.ds;
      double f = 0.0;
      Vec c, cres;
      if (evaluate_values(x, s, it.obj_scale, f, c, cres) && theta(cres) < (1.0 - 1e-4 * alpha) * th0) {
        d.dzl.setZero();
        d.dzu.setZero();
        d.dvl.setZero();
        d.dvu.setZero();
        accept(it, d, 0.0, x, s, f, c, cres);
        filter_.clear();
        return true;
      }
    }
    return false;
  }

  const Problem& p_;
  IpmOptions opt_;
  int n_ = 0, m_ = 0, ns_ = 0;
  Vec xl_, xu_, gl_, gu_, sl_, su_;
  std::vector<int> eq_, slack_of_row_, row_slack_;

  double mu_ = 0.1;
  double theta_max_ = 1e4;
  double delta_w_cur_ = 0.0;
  double delta_c_cur_ = 1e-9;
  double last_alpha_ = 0.0;
  int last_trials_ = 0;
  std::vector<std::pair<double, double>> filter_;

  double f_ = 0.0;
  Vec c_, c_res_, grad_;
  Vec sigma_x_, sigma_s_;
  std::vector<Triplet> jac_trip_, hess_trip_;
  Eigen::SparseMatrix<double> J_;
  Eigen::SparseMatrix<double> kkt_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  bool pattern_ready_ = false;
  bool lu_ready_ = false;
  int negative_ = 0;
  bool convexified_ = false;
  int zero_ = 0;
};

}  // namespace envmpc
