#pragma once

// Forward-mode automatic differentiation scalars.
//
// Dual<N> carries a value and an N-gradient; Jet<N> additionally carries the
// N x N Hessian. Every model function in the library is a template over its
// scalar type, so the same source yields values (double), Jacobians (Dual)
// and second derivatives (Jet) without hand-derived expressions.

#include <Eigen/Core>

#include <cmath>

namespace envmpc {

template <int N>
struct Dual {
  using Vec = Eigen::Matrix<double, N, 1>;

  double v = 0.0;
  Vec d = Vec::Zero();

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT(google-explicit-constructor)
  Dual(double value, const Vec& grad) : v(value), d(grad) {}

  static Dual variable(double value, int index) {
    Dual r(value);
    r.d[index] = 1.0;
    return r;
  }

  Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
  Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
  Dual& operator*=(const Dual& o) { d = o.v * d + v * o.d; v *= o.v; return *this; }
  Dual& operator/=(const Dual& o) { *this = *this / o; return *this; }

  friend Dual operator-(const Dual& a) { return {-a.v, -a.d}; }
  friend Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend Dual operator*(const Dual& a, const Dual& b) { return {a.v * b.v, b.v * a.d + a.v * b.d}; }
  friend Dual operator/(const Dual& a, const Dual& b) {
    const double inv = 1.0 / b.v;
    return {a.v * inv, (a.d - (a.v * inv) * b.d) * inv};
  }
  friend Dual operator+(const Dual& a, double b) { return {a.v + b, a.d}; }
  friend Dual operator+(double a, const Dual& b) { return {a + b.v, b.d}; }
  friend Dual operator-(const Dual& a, double b) { return {a.v - b, a.d}; }
  friend Dual operator-(double a, const Dual& b) { return {a - b.v, -b.d}; }
  friend Dual operator*(const Dual& a, double b) { return {a.v * b, a.d * b}; }
  friend Dual operator*(double a, const Dual& b) { return {a * b.v, a * b.d}; }
  friend Dual operator/(const Dual& a, double b) { return {a.v / b, a.d / b}; }
  friend Dual operator/(double a, const Dual& b) {
    const double inv = 1.0 / b.v;
    return {a * inv, (-a * inv * inv) * b.d};
  }

  friend bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
  friend bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }

  // Chain rule for a unary function with derivative df at v.
  Dual chain(double fv, double df) const { return {fv, df * d}; }
};

template <int N>
struct Jet {
  using Vec = Eigen::Matrix<double, N, 1>;
  using Mat = Eigen::Matrix<double, N, N>;

  double v = 0.0;
  Vec d = Vec::Zero();
  Mat h = Mat::Zero();

  Jet() = default;
  Jet(double value) : v(value) {}  // NOLINT(google-explicit-constructor)
  Jet(double value, const Vec& grad, const Mat& hess) : v(value), d(grad), h(hess) {}

  static Jet variable(double value, int index) {
    Jet r(value);
    r.d[index] = 1.0;
    return r;
  }

  Jet& operator+=(const Jet& o) { v += o.v; d += o.d; h += o.h; return *this; }
  Jet& operator-=(const Jet& o) { v -= o.v; d -= o.d; h -= o.h; return *this; }
  Jet& operator*=(const Jet& o) { *this = *this * o; return *this; }
  Jet& operator/=(const Jet& o) { *this = *this / o; return *this; }

  friend Jet operator-(const Jet& a) { return {-a.v, -a.d, -a.h}; }
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b) {
    Mat cross = a.d * b.d.transpose();
    return {a.v * b.v, b.v * a.d + a.v * b.d, b.v * a.h + a.v * b.h + cross + cross.transpose()};
  }
  friend Jet operator/(const Jet& a, const Jet& b) {
    const double inv = 1.0 / b.v;
    return a * b.chain(inv, -inv * inv, 2.0 * inv * inv * inv);
  }
  friend Jet operator+(const Jet& a, double b) { return {a.v + b, a.d, a.h}; }
  friend Jet operator+(double a, const Jet& b) { return {a + b.v, b.d, b.h}; }
  friend Jet operator-(const Jet& a, double b) { return {a.v - b, a.d, a.h}; }
  friend Jet operator-(double a, const Jet& b) { return {a - b.v, -b.d, -b.h}; }
  friend Jet operator*(const Jet& a, double b) { return {a.v * b, a.d * b, a.h * b}; }
  friend Jet operator*(double a, const Jet& b) { return {a * b.v, a * b.d, a * b.h}; }
  friend Jet operator/(const Jet& a, double b) { return a * (1.0 / b); }
  friend Jet operator/(double a, const Jet& b) {
    const double inv = 1.0 / b.v;
    return a * b.chain(inv, -inv * inv, 2.0 * inv * inv * inv);
  }

  friend bool operator<(const Jet& a, const Jet& b) { return a.v < b.v; }
  friend bool operator>(const Jet& a, const Jet& b) { return a.v > b.v; }

  // Chain rule for a unary function with first/second derivatives df, d2f at v.
  Jet chain(double fv, double df, double d2f) const {
    return {fv, df * d, df * h + d2f * (d * d.transpose())};
  }
};

inline double value_of(double x) { return x; }
template <int N> double value_of(const Dual<N>& x) { return x.v; }
template <int N> double value_of(const Jet<N>& x) { return x.v; }

// Elementary functions. Dual overloads use first derivatives only.
template <int N> Dual<N> exp(const Dual<N>& x) { const double e = std::exp(x.v); return x.chain(e, e); }
template <int N> Dual<N> log(const Dual<N>& x) { return x.chain(std::log(x.v), 1.0 / x.v); }
template <int N> Dual<N> log1p(const Dual<N>& x) { return x.chain(std::log1p(x.v), 1.0 / (1.0 + x.v)); }
template <int N> Dual<N> sqrt(const Dual<N>& x) { const double s = std::sqrt(x.v); return x.chain(s, 0.5 / s); }
template <int N> Dual<N> sin(const Dual<N>& x) { return x.chain(std::sin(x.v), std::cos(x.v)); }
template <int N> Dual<N> cos(const Dual<N>& x) { return x.chain(std::cos(x.v), -std::sin(x.v)); }
template <int N> Dual<N> atan(const Dual<N>& x) { return x.chain(std::atan(x.v), 1.0 / (1.0 + x.v * x.v)); }
template <int N> Dual<N> tanh(const Dual<N>& x) {
  const double t = std::tanh(x.v);
  return x.chain(t, 1.0 - t * t);
}

template <int N> Jet<N> exp(const Jet<N>& x) { const double e = std::exp(x.v); return x.chain(e, e, e); }
template <int N> Jet<N> log(const Jet<N>& x) {
  const double inv = 1.0 / x.v;
  return x.chain(std::log(x.v), inv, -inv * inv);
}
template <int N> Jet<N> log1p(const Jet<N>& x) {
  const double inv = 1.0 / (1.0 + x.v);
  return x.chain(std::log1p(x.v), inv, -inv * inv);
}
template <int N> Jet<N> sqrt(const Jet<N>& x) {
  const double s = std::sqrt(x.v);
  return x.chain(s, 0.5 / s, -0.25 / (s * x.v));
}
template <int N> Jet<N> sin(const Jet<N>& x) {
  const double s = std::sin(x.v);
  return x.chain(s, std::cos(x.v), -s);
}
template <int N> Jet<N> cos(const Jet<N>& x) {
  const double c = std::cos(x.v);
  return x.chain(c, -std::sin(x.v), -c);
}
template <int N> Jet<N> atan(const Jet<N>& x) {
  const double q = 1.0 / (1.0 + x.v * x.v);
  return x.chain(std::atan(x.v), q, -2.0 * x.v * q * q);
}
template <int N> Jet<N> tanh(const Jet<N>& x) {
  const double t = std::tanh(x.v);
  const double dt = 1.0 - t * t;
  return x.chain(t, dt, -2.0 * t * dt);
}

}  // namespace envmpc
