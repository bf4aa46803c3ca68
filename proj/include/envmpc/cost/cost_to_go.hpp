#pragma once

// Racing cost-to-go: remaining arc length to the end of a look-ahead window,
// regressed onto a bivariate cubic in position.

#include "envmpc/geometry/path.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace envmpc {

inline constexpr int kCubicTerms = 10;

/// Exponent pairs (i, j) of x^i y^j with i + j <= 3, in coefficient order.
inline constexpr std::array<std::array<int, 2>, kCubicTerms> kCubicExponents{{
    {0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}, {3, 0}, {2, 1}, {1, 2}, {0, 3},
}};

using CubicCoeffs = std::array<double, kCubicTerms>;

template <typename T>
T eval_cost_to_go(const T& x, const T& y, const CubicCoeffs& w) {
  const T x2 = x * x;
  const T y2 = y * y;
  return w[0] + w[1] * x + w[2] * y + w[3] * x2 + w[4] * (x * y) + w[5] * y2 + w[6] * (x2 * x) +
         w[7] * (x2 * y) + w[8] * (x * y2) + w[9] * (y2 * y);
}

class CostToGoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fitted cost-to-go in a local frame: the polynomial is in
/// ((x - ox) / scale, (y - oy) / scale).
struct CostToGo {
  geometry::Point origin{0.0, 0.0};
  double scale = 1.0;
  CubicCoeffs local{};
  double rms = 0.0;
  double max_residual = 0.0;
  double s0 = 0.0;
  double s_f = 0.0;
  std::size_t samples = 0;

  template <typename T>
  T operator()(const T& x, const T& y) const {
    return eval_cost_to_go(T((x - origin.x()) / scale), T((y - origin.y()) / scale), local);
  }

  /// Equivalent coefficients in raw global coordinates.
  CubicCoeffs global() const {
    auto binom = [](int n, int k) {
      static constexpr int table[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
      return table[n][k];
    };
    CubicCoeffs out{};
    for (int t = 0; t < kCubicTerms; ++t) {
      const int i = kCubicExponents[t][0];
      const int j = kCubicExponents[t][1];
      const double c = local[t] / std::pow(scale, i + j);
      for (int a = 0; a <= i; ++a) {
        for (int b = 0; b <= j; ++b) {
          const double term = c * binom(i, a) * binom(j, b) * std::pow(-origin.x(), i - a) *
                              std::pow(-origin.y(), j - b);
          for (int k = 0; k < kCubicTerms; ++k) {
            if (kCubicExponents[k][0] == a && kCubicExponents[k][1] == b) {
              out[k] += term;
            }
          }
        }
      }
    }
    return out;
  }
};

struct CostToGoOptions {
  double station_step = 2.0;  ///< [m] spacing of labelled centerline stations
  int lateral_points = 15;    ///< per station, the centerline point included
};

/// One labelled regression sample.
struct CostToGoSample {
  geometry::Point p;
  double s;
  double label;
};

/// Samples stations s in [s0, s_f], s_f = s0 + ux_max Tp, and at each the
/// given number of points spread uniformly across the road width, all
/// labelled s_f - s. `half_widths` holds one value per centerline point.
inline std::vector<CostToGoSample> cost_to_go_samples(const geometry::ArcPath& centerline,
                                                      const std::vector<double>& half_widths, double s0,
                                                      double ux_max, double Tp,
                                                      const CostToGoOptions& opt = {}) {
  if (half_widths.size() != centerline.size()) {
    throw std::invalid_argument("cost_to_go: need one half width per centerline point");
  }
  if (!(ux_max > 0.0) || !(Tp > 0.0) || opt.lateral_points < 1 || !(opt.station_step > 0.0)) {
    throw std::invalid_argument("cost_to_go: invalid window or sampling options");
  }
  const double span = ux_max * Tp;
  const double s_f = s0 + span;
  if (!centerline.closed() && (s0 < -1e-9 || s_f > centerline.length() + 1e-9)) {
    throw std::invalid_argument("cost_to_go: centerline does not cover [s0, s0 + ux_max Tp]");
  }
  const auto& st = centerline.stations();
  auto half_width = [&](double s) {
    const double sn = centerline.normalize(s);
    const std::size_t i = centerline.segment(sn);
    const double t = (sn - st[i]) / (st[i + 1] - st[i]);
    return (1.0 - t) * half_widths[i] + t * half_widths[i + 1];
  };
  const int n_st = std::max(2, static_cast<int>(std::ceil(span / opt.station_step)) + 1);
  const int m = opt.lateral_points;
  std::vector<CostToGoSample> out;
  out.reserve(static_cast<std::size_t>(n_st * m));
  for (int k = 0; k < n_st; ++k) {
    const double s = s0 + span * k / (n_st - 1);
    const geometry::Point c = centerline.point_at(s);
    const double th = centerline.heading_at(s);
    const geometry::Point n(-std::sin(th), std::cos(th));
    const double w = half_width(s);
    for (int l = 0; l < m; ++l) {
      const double off = m == 1 ? 0.0 : w * (2.0 * l / (m - 1) - 1.0);
      out.push_back({c + off * n, s, s_f - s});
    }
  }
  return out;
}

/// Least-squares cubic fit of the labelled samples in the local frame
/// centred on the window start and scaled by the window length.
inline CostToGo fit_cost_to_go(const geometry::ArcPath& centerline, const std::vector<double>& half_widths,
                               double s0, double ux_max, double Tp, const CostToGoOptions& opt = {}) {
  const std::vector<CostToGoSample> samples = cost_to_go_samples(centerline, half_widths, s0, ux_max, Tp, opt);
  CostToGo fit;
  fit.origin = centerline.point_at(s0);
  fit.scale = ux_max * Tp;
  fit.s0 = s0;
  fit.s_f = s0 + ux_max * Tp;
  fit.samples = samples.size();
  Eigen::MatrixXd A(samples.size(), kCubicTerms);
  Eigen::VectorXd b(samples.size());
  for (std::size_t r = 0; r < samples.size(); ++r) {
    const double x = (samples[r].p.x() - fit.origin.x()) / fit.scale;
    const double y = (samples[r].p.y() - fit.origin.y()) / fit.scale;
    for (int t = 0; t < kCubicTerms; ++t) {
      A(static_cast<Eigen::Index>(r), t) = std::pow(x, kCubicExponents[t][0]) * std::pow(y, kCubicExponents[t][1]);
    }
    b[static_cast<Eigen::Index>(r)] = samples[r].label;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-10);
  if (qr.rank() < kCubicTerms) {
    throw CostToGoError("cost-to-go regression is rank deficient (rank " + std::to_string(qr.rank()) +
                        " of 10); sample geometry is degenerate");
  }
  const Eigen::VectorXd c = qr.solve(b);
  for (int t = 0; t < kCubicTerms; ++t) fit.local[t] = c[t];
  const Eigen::VectorXd res = A * c - b;
  fit.rms = std::sqrt(res.squaredNorm() / static_cast<double>(samples.size()));
  fit.max_residual = res.lpNorm<Eigen::Infinity>();
  return fit;
}

}  // namespace envmpc
