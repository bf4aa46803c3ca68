#pragma once

#include "envmpc/autodiff/jet.hpp"
#include "envmpc/envelope/block.hpp"
#include "envmpc/envelope/lse.hpp"
#include "envmpc/geometry/polygon.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace envmpc {

inline constexpr double kDefaultRhoLse = -15.0;
inline constexpr double kDefaultBoundaryResolution = 0.25;  // [m]

inline geometry::Polygon block_rectangle(const EnvelopeBlock& b) {
  const auto c = b.corners();
  return {c.begin(), c.end()};
}

/// Area shared by the bounding rectangles of two blocks.
inline double rectangle_overlap_area(const EnvelopeBlock& a, const EnvelopeBlock& b) {
  return geometry::intersection_area(block_rectangle(a), block_rectangle(b));
}

/// Union of p-norm blocks aggregated with a LogSumExp of negative gain and
/// shifted by the conservativeness offset epsilon0 <= 0. Immutable once
/// constructed.
class SpatialEnvelope {
 public:
  SpatialEnvelope() = default;

  /// Builds an envelope with a known offset (e.g. loaded from file).
  SpatialEnvelope(std::vector<EnvelopeBlock> blocks, double rho_lse, double epsilon0)
      : blocks_(std::move(blocks)), rho_(rho_lse), epsilon0_(epsilon0) {
    validate();
  }

  /// Builds the envelope and computes epsilon0 from the union boundary,
  /// sampled at `resolution` meters, plus any caller-provided safety
  /// boundary points (e.g. lane edges).
  static SpatialEnvelope finalize(std::vector<EnvelopeBlock> blocks, double rho_lse = kDefaultRhoLse,
                                  double resolution = kDefaultBoundaryResolution,
                                  const std::vector<geometry::Point>& extra_boundary = {});

  const std::vector<EnvelopeBlock>& blocks() const { return blocks_; }
  double rho() const { return rho_; }
  double epsilon0() const { return epsilon0_; }
  const std::vector<geometry::Point>& boundary_samples() const { return samples_; }
  bool empty() const { return blocks_.empty(); }

  /// Non-smooth membership oracle: min_j g_j. <= 0 iff inside the union.
  double exact_membership(double x, double y) const {
    double g = std::numeric_limits<double>::infinity();
    for (const EnvelopeBlock& b : blocks_) {
      g = std::min(g, block_distance(x, y, b));
    }
    return g;
  }

  /// Smooth aggregate g_lse over all blocks.
  template <typename T>
  T lse(const T& x, const T& y) const {
    std::vector<T> g;
    g.reserve(blocks_.size());
    for (const EnvelopeBlock& b : blocks_) {
      g.push_back(block_distance(x, y, b));
    }
    return lse_aggregate(std::span<const T>(g.data(), g.size()), rho_);
  }

  /// Conservative envelope constraint g_lse - epsilon0; < 0 implies inside.
  template <typename T>
  T constraint(const T& x, const T& y) const {
    return lse(x, y) - epsilon0_;
  }

  /// Value and gradient of the conservative constraint.
  std::pair<double, Eigen::Vector2d> constraint_gradient(double x, double y) const {
    const auto g = constraint(Dual<2>::variable(x, 0), Dual<2>::variable(y, 1));
    return {g.v, g.d};
  }

  /// Blocks whose bounding circle meets the disk (center, radius), with the
  /// parent's epsilon0. Dropping LSE terms can only raise g_lse, so the view
  /// is never less conservative than the full envelope.
  SpatialEnvelope local_view(const geometry::Point& center, double radius) const {
    SpatialEnvelope view;
    view.rho_ = rho_;
    view.epsilon0_ = epsilon0_;
    for (const EnvelopeBlock& b : blocks_) {
      const double reach = std::hypot(b.Lb, b.Wb);
      if (std::hypot(b.xb - center.x(), b.yb - center.y()) <= radius + reach) {
        view.blocks_.push_back(b);
      }
    }
    return view;
  }

  /// Index i of the first consecutive pair (i, i+1) whose rectangles do not
  /// overlap with positive area, if any.
  std::optional<std::size_t> first_disconnected_pair(double min_area = 1e-9) const {
    for (std::size_t i = 0; i + 1 < blocks_.size(); ++i) {
      if (!(rectangle_overlap_area(blocks_[i], blocks_[i + 1]) > min_area)) {
        return i;
      }
    }
    return std::nullopt;
  }

  geometry::Box bounding_box() const {
    geometry::Box box;
    for (const EnvelopeBlock& b : blocks_) {
      for (const auto& c : b.corners()) {
        box.extend(c);
      }
    }
    return box;
  }

 private:
  void validate() const {
    if (!(rho_ < 0.0)) {
      throw std::invalid_argument("spatial envelope: rho_lse must be negative");
    }
    if (!(epsilon0_ <= 0.0)) {
      throw std::invalid_argument("spatial envelope: epsilon0 must be <= 0");
    }
    for (const EnvelopeBlock& b : blocks_) {
      b.validate();
    }
  }

  std::vector<EnvelopeBlock> blocks_;
  double rho_ = kDefaultRhoLse;
  double epsilon0_ = 0.0;
  std::vector<geometry::Point> samples_;
};

/// Samples the boundary of the union of blocks: each block's superellipse
/// perimeter at roughly `resolution` spacing, keeping only points not inside
/// another block, plus the exact crossing points where exposure changes
/// (the union's concave vertices, where the LSE dips lowest).
inline std::vector<geometry::Point> union_boundary_samples(const std::vector<EnvelopeBlock>& blocks,
                                                           double resolution = kDefaultBoundaryResolution) {
  if (!(resolution > 0.0)) {
    throw std::invalid_argument("union_boundary_samples: resolution must be positive");
  }
  std::vector<geometry::Point> out;
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    const EnvelopeBlock& b = blocks[j];
    std::vector<std::size_t> neighbors;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const EnvelopeBlock& o = blocks[k];
      if (k != j && std::hypot(o.xb - b.xb, o.yb - b.yb) <= std::hypot(o.Lb, o.Wb) + std::hypot(b.Lb, b.Wb)) {
        neighbors.push_back(k);
      }
    }
    auto covered = [&](const geometry::Point& q) {
      double g = std::numeric_limits<double>::infinity();
      for (std::size_t k : neighbors) {
        g = std::min(g, block_distance(q.x(), q.y(), blocks[k]));
      }
      return g;
    };
    // Uniform parameter steps cluster near the flat sides for p > 2; double
    // the count so the largest gap stays near the requested resolution.
    const int n = std::max(16, static_cast<int>(std::ceil(2.0 * 4.0 * (b.Lb + b.Wb) / resolution)));
    const double dt = 2.0 * std::numbers::pi / n;
    double prev_t = 0.0;
    double prev_cov = covered(b.boundary_point(0.0));
    for (int i = 0; i <= n; ++i) {
      const double t = i * dt;
      const geometry::Point q = b.boundary_point(t);
      const double cov = covered(q);
      if (i > 0 && ((cov >= 0.0) != (prev_cov >= 0.0))) {
        double lo = prev_t;
        double hi = t;
        const bool lo_exposed = prev_cov >= 0.0;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          const bool exposed = covered(b.boundary_point(mid)) >= 0.0;
          (exposed == lo_exposed ? lo : hi) = mid;
        }
        out.push_back(b.boundary_point(lo_exposed ? lo : hi));
      }
      if (i < n && cov >= 0.0) {
        out.push_back(q);
      }
      prev_t = t;
      prev_cov = cov;
    }
  }
  return out;
}

/// epsilon0 = min(0, min over boundary samples outside-or-on the union of
/// g_lse). Samples strictly inside the union do not belong to the critical
/// set and are skipped.
inline double compute_epsilon0(const std::vector<EnvelopeBlock>& blocks, double rho_lse,
                               const std::vector<geometry::Point>& samples) {
  if (samples.empty()) {
    throw std::invalid_argument("compute_epsilon0: empty boundary sample list");
  }
  const SpatialEnvelope raw(blocks, rho_lse, 0.0);
  double eps = 0.0;
  for (const geometry::Point& q : samples) {
    if (raw.exact_membership(q.x(), q.y()) < -1e-12) {
      continue;
    }
    eps = std::min(eps, raw.lse(q.x(), q.y()));
  }
  return eps;
}

inline SpatialEnvelope SpatialEnvelope::finalize(std::vector<EnvelopeBlock> blocks, double rho_lse,
                                                 double resolution,
                                                 const std::vector<geometry::Point>& extra_boundary) {
  if (blocks.empty()) {
    throw std::invalid_argument("spatial envelope needs at least one block");
  }
  std::vector<geometry::Point> samples = union_boundary_samples(blocks, resolution);
  samples.insert(samples.end(), extra_boundary.begin(), extra_boundary.end());
  const double eps = compute_epsilon0(blocks, rho_lse, samples);
  SpatialEnvelope env(std::move(blocks), rho_lse, eps);
  env.samples_ = std::move(samples);
  return env;
}

}  // namespace envmpc
