#pragma once

// Overflow-safe smooth primitives shared by the vehicle model, the envelope
// constraints and the cost terms.

#include "envmpc/autodiff/jet.hpp"

#include <cmath>

namespace envmpc {

using std::atan;
using std::cos;
using std::exp;
using std::log;
using std::log1p;
using std::sin;
using std::sqrt;
using std::tanh;

/// log(1 + e^z) without overflow for large |z|.
template <typename T>
T softplus(const T& z) {
  if (value_of(z) > 0.0) {
    return z + log1p(exp(-z));
  }
  return log1p(exp(z));
}

/// 1 / (1 + e^-z), evaluated on the branch that never exponentiates a large
/// positive argument.
template <typename T>
T sigmoid(const T& z) {
  if (value_of(z) >= 0.0) {
    return 1.0 / (1.0 + exp(-z));
  }
  const T e = exp(z);
  return e / (1.0 + e);
}

/// x^n for small non-negative integer n by repeated multiplication.
template <typename T>
T ipow(const T& x, int n) {
  T r(1.0);
  for (int i = 0; i < n; ++i) {
    r = r * x;
  }
  return r;
}

}  // namespace envmpc
