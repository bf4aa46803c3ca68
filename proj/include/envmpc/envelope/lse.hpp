#pragma once

#include "envmpc/autodiff/smooth.hpp"

#include <algorithm>
#include <span>
#include <vector>
#include <stdexcept>

namespace envmpc {

/// (1/rho) ln sum_j exp(rho g_j), shifted by the extreme value so that no
/// exponent exceeds zero. rho < 0 gives a smooth lower bound on min(g);
/// rho > 0 a smooth upper bound on max(g).
template <typename T>
T lse_aggregate(std::span<const T> values, double rho) {
  if (values.empty()) {
    throw std::invalid_argument("lse_aggregate: empty value set");
  }
  if (rho == 0.0) {
    throw std::invalid_argument("lse_aggregate: rho must be nonzero");
  }
  // Shift by the value that maximizes rho * g (min for rho < 0, max for rho > 0).
  double shift = value_of(values[0]);
  for (const T& g : values) {
    const double gv = value_of(g);
    shift = rho < 0.0 ? std::min(shift, gv) : std::max(shift, gv);
  }
  T sum(0.0);
  for (const T& g : values) {
    sum += exp(rho * (g - shift));
  }
  return shift + log(sum) / rho;
}

template <typename T>
T lse_aggregate(const std::vector<T>& values, double rho) {
  return lse_aggregate(std::span<const T>(values.data(), values.size()), rho);
}

}  // namespace envmpc
