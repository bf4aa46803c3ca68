#include "envmpc/ocp/ipm.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

namespace {

using envmpc::InteriorPointSolver;
using envmpc::IpmOptions;
using envmpc::SolveStatus;
using envmpc::Triplet;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Hock-Schittkowski problem 71.
struct Hs071 {
  int n() const { return 4; }
  int m() const { return 2; }
  void bounds(VectorXd& xl, VectorXd& xu, VectorXd& gl, VectorXd& gu) const {
    xl = VectorXd::Constant(4, 1.0);
    xu = VectorXd::Constant(4, 5.0);
    gl.resize(2);
    gu.resize(2);
    gl << 25.0, 40.0;
    gu << kInf, 40.0;
  }
  double objective(const VectorXd& x) const { return x[0] * x[3] * (x[0] + x[1] + x[2]) + x[2]; }
  void constraints(const VectorXd& x, VectorXd& c) const {
    c.resize(2);
    c << x[0] * x[1] * x[2] * x[3], x.squaredNorm();
  }
  void gradient(const VectorXd& x, VectorXd& g) const {
    g.resize(4);
    g << x[3] * (2 * x[0] + x[1] + x[2]), x[0] * x[3], x[0] * x[3] + 1.0, x[0] * (x[0] + x[1] + x[2]);
  }
  void jacobian(const VectorXd& x, std::vector<Triplet>& J) const {
    for (int j = 0; j < 4; ++j) {
      double p = 1.0;
      for (int k = 0; k < 4; ++k) {
        if (k != j) p *= x[k];
      }
      J.emplace_back(0, j, p);
      J.emplace_back(1, j, 2.0 * x[j]);
    }
  }
  void hessian(const VectorXd& x, double s, const VectorXd& l, std::vector<Triplet>& H) const {
    H.emplace_back(0, 0, s * 2 * x[3] + l[1] * 2);
    H.emplace_back(1, 0, s * x[3] + l[0] * x[2] * x[3]);
    H.emplace_back(1, 1, l[1] * 2);
    H.emplace_back(2, 0, s * x[3] + l[0] * x[1] * x[3]);
    H.emplace_back(2, 1, l[0] * x[0] * x[3]);
    H.emplace_back(2, 2, l[1] * 2);
    H.emplace_back(3, 0, s * (2 * x[0] + x[1] + x[2]) + l[0] * x[1] * x[2]);
    H.emplace_back(3, 1, s * x[0] + l[0] * x[0] * x[2]);
    H.emplace_back(3, 2, s * x[0] + l[0] * x[0] * x[1]);
    H.emplace_back(3, 3, l[1] * 2);
  }
};

TEST(InteriorPoint, SolvesHs071) {
  Hs071 p;
  InteriorPointSolver<Hs071> solver(p);
  VectorXd x0(4);
  x0 << 1.0, 5.0, 5.0, 1.0;
  const auto r = solver.solve(x0);
  ASSERT_EQ(r.status, SolveStatus::converged) << r.message;
  EXPECT_NEAR(r.objective, 17.014017145, 1e-6);
  EXPECT_NEAR(r.it.x[0], 1.0, 1e-5);
  EXPECT_NEAR(r.it.x[1], 4.7429994, 1e-5);
  EXPECT_NEAR(r.it.x[2], 3.8211503, 1e-5);
  EXPECT_NEAR(r.it.x[3], 1.3794082, 1e-5);
  EXPECT_LT(r.iterations, 30);
}

TEST(InteriorPoint, WarmStartFromSolutionConvergesFast) {
  Hs071 p;
  InteriorPointSolver<Hs071> solver(p);
  VectorXd x0(4);
  x0 << 1.0, 5.0, 5.0, 1.0;
  const auto r = solver.solve(x0);
  ASSERT_EQ(r.status, SolveStatus::converged);
  InteriorPointSolver<Hs071> again(p);
  const auto w = again.solve(r.it.x, &r.it);
  ASSERT_EQ(w.status, SolveStatus::converged);
  EXPECT_LE(w.iterations, 3);
  EXPECT_NEAR(w.objective, r.objective, 1e-7);
}

// Nonconvex: min -(x-1)^2 - (y-1)^2 on [0, 3]^2 s.t. x + y = 2; optimum at a corner.
struct ConcaveOnLine {
  int n() const { return 2; }
  int m() const { return 1; }
  void bounds(VectorXd& xl, VectorXd& xu, VectorXd& gl, VectorXd& gu) const {
    xl = VectorXd::Zero(2);
    xu = VectorXd::Constant(2, 3.0);
    gl = VectorXd::Constant(1, 2.0);
    gu = VectorXd::Constant(1, 2.0);
  }
  double objective(const VectorXd& x) const { return -std::pow(x[0] - 1, 2) - std::pow(x[1] - 1, 2); }
  void constraints(const VectorXd& x, VectorXd& c) const { c = VectorXd::Constant(1, x[0] + x[1]); }
  void gradient(const VectorXd& x, VectorXd& g) const {
    g.resize(2);
    g << -2 * (x[0] - 1), -2 * (x[1] - 1);
  }
  void jacobian(const VectorXd&, std::vector<Triplet>& J) const {
    J.emplace_back(0, 0, 1.0);
    J.emplace_back(0, 1, 1.0);
  }
  void hessian(const VectorXd&, double s, const VectorXd&, std::vector<Triplet>& H) const {
    H.emplace_back(0, 0, -2 * s);
    H.emplace_back(1, 1, -2 * s);
  }
};

TEST(InteriorPoint, HandlesNegativeCurvature) {
  ConcaveOnLine p;
  InteriorPointSolver<ConcaveOnLine> solver(p);
  VectorXd x0(2);
  x0 << 1.2, 0.8;
  const auto r = solver.solve(x0);
  ASSERT_EQ(r.status, SolveStatus::converged) << r.message;
  EXPECT_NEAR(r.objective, -2.0, 1e-6);
  EXPECT_NEAR(std::min(r.it.x[0], r.it.x[1]), 0.0, 1e-6);
}

// x in [0, 1] with x = 2: no feasible point.
struct Infeasible {
  int n() const { return 1; }
  int m() const { return 1; }
  void bounds(VectorXd& xl, VectorXd& xu, VectorXd& gl, VectorXd& gu) const {
    xl = VectorXd::Zero(1);
    xu = VectorXd::Ones(1);
    gl = VectorXd::Constant(1, 2.0);
    gu = VectorXd::Constant(1, 2.0);
  }
  double objective(const VectorXd& x) const { return x[0] * x[0]; }
  void constraints(const VectorXd& x, VectorXd& c) const { c = x; }
  void gradient(const VectorXd& x, VectorXd& g) const { g = 2 * x; }
  void jacobian(const VectorXd&, std::vector<Triplet>& J) const { J.emplace_back(0, 0, 1.0); }
  void hessian(const VectorXd&, double s, const VectorXd&, std::vector<Triplet>& H) const {
    H.emplace_back(0, 0, 2 * s);
  }
};

TEST(InteriorPoint, ReportsInfeasibleOrIterationLimit) {
  Infeasible p;
  IpmOptions opt;
  opt.max_iter = 200;
  InteriorPointSolver<Infeasible> solver(p, opt);
  const auto r = solver.solve(VectorXd::Constant(1, 0.5));
  EXPECT_NE(r.status, SolveStatus::converged);
  EXPECT_GT(r.primal_inf, 0.5);
}

TEST(InteriorPoint, IterationCapIsHonoured) {
  Hs071 p;
  IpmOptions opt;
  opt.max_iter = 2;
  InteriorPointSolver<Hs071> solver(p, opt);
  VectorXd x0(4);
  x0 << 1.0, 5.0, 5.0, 1.0;
  const auto r = solver.solve(x0);
  EXPECT_EQ(r.status, SolveStatus::max_iter);
  EXPECT_EQ(r.iterations, 2);
}

}  // namespace
