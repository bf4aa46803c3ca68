#pragma once

#include "envmpc/envelope/spatial_envelope.hpp"
#include "envmpc/planner/block_design.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace envmpc {

using BlockInitializer = std::function<BlockDesign(const RoadBoundary&, const QuadIndex&, double station)>;

inline BlockInitializer heuristic_initializer(HeuristicOptions opt = {}) {
  return [opt](const RoadBoundary& r, const QuadIndex& q, double s) { return init_block_heuristic(r, q, s, opt); };
}

inline BlockInitializer naive_initializer() { return init_block_naive; }

struct PlannerOptions {
  int block_norm_p = 4;
  double rho_lse = kDefaultRhoLse;
  double resolution = kDefaultBoundaryResolution;
  BlockInitializer initializer = heuristic_initializer();
  BlockOptimizeOptions optimizer;
  double end_tolerance = 1.0;  ///< [m] an open road is covered once a block reaches this close to its end
  int max_blocks = 2000;
  int max_backoffs = 20;
  bool finalize = true;        ///< compute epsilon0; off for timing the design loop alone
};

struct PlannedBlock {
  BlockDesign init;
  BlockDesign design;
  BlockStatus status = BlockStatus::unchanged;
  int evaluations = 0;
  double station = 0.0;  ///< centerline station of the start point
  AreaSplit area;
  double chi = 0.0;
};

struct PlannedEnvelope {
  SpatialEnvelope envelope;
  std::vector<PlannedBlock> blocks;
  double design_ms = 0.0;
  int evaluations = 0;
};

class PlanningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Chains designed blocks along the road. Each next start is the cross
/// section through the previous block's center; when a new block would not
/// overlap its predecessor the start is pulled back by halving.
inline PlannedEnvelope plan_envelope(const RoadBoundary& road, const PlannerOptions& opt = {}) {
  if (road.length() < 1.0) throw PlanningError("road too short to plan an envelope");
  const auto t0 = std::chrono::steady_clock::now();
  const QuadIndex idx(road);
  const geometry::ArcPath path = road.centerline_path();
  const double total = road.length();
  PlannedEnvelope out;

  auto design_at = [&](double station) {
    PlannedBlock pb;
    pb.station = station;
    pb.init = opt.initializer(road, idx, station);
    const BlockOptimizeResult r = optimize_block(pb.init, idx, road.cross_normal(station), opt.optimizer);
    pb.design = r.design;
    pb.status = r.status;
    pb.evaluations = r.evaluations;
    out.evaluations += r.evaluations;
    return pb;
  };
  // Unwrapped station of a point near the unwrapped station `hint`.
  auto station_of = [&](const geometry::Point& p, double hint) {
    const double s = path.project(p, path.normalize(hint), 60.0, 300.0);
    if (!road.closed) return s;
    double ds = s - path.normalize(hint);
    if (ds > 0.5 * total) ds -= total;
    if (ds < -0.5 * total) ds += total;
    return hint + ds;
  };

  double s = 0.0;
  while (true) {
    if (static_cast<int>(out.blocks.size()) >= opt.max_blocks) throw PlanningError("block budget exhausted");
    PlannedBlock pb = design_at(s);
    if (pb.status == BlockStatus::failed) throw PlanningError("no feasible block at station " + std::to_string(s));
    if (!out.blocks.empty()) {
      const PlannedBlock& prev = out.blocks.back();
      int backoffs = 0;
      double pull = prev.design.L;
      while (rectangle_overlap_area(prev.design.to_block(), pb.design.to_block()) <= 0.0) {
        if (++backoffs > opt.max_backoffs) throw PlanningError("consecutive blocks cannot be made to overlap");
        pull *= 0.5;
        s = station_of(prev.design.C + pull * prev.design.axis(), prev.station);
        pb = design_at(s);
      }
    }
    out.blocks.push_back(pb);

    const BlockDesign& d = pb.design;
    const double front = station_of(d.C + 2.0 * d.L * d.axis(), s);
    const double next = station_of(d.center(), s);
    if (road.closed ? next >= total : (front >= total - opt.end_tolerance || next >= total - opt.end_tolerance)) {
      break;
    }
    if (!(next > s + 1e-6)) throw PlanningError("planner made no progress at station " + std::to_string(s));
    s = next;
  }
  out.design_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  std::vector<EnvelopeBlock> blocks;
  for (PlannedBlock& pb : out.blocks) {
    pb.area = block_area_split(pb.design, idx);
    pb.chi = reward(pb.design.L, pb.area.in, pb.area.out);
    blocks.push_back(pb.design.to_block(opt.block_norm_p));
  }
  out.envelope = opt.finalize ? SpatialEnvelope::finalize(std::move(blocks), opt.rho_lse, opt.resolution)
                              : SpatialEnvelope(std::move(blocks), opt.rho_lse, 0.0);
  return out;
}

}  // namespace envmpc
