#include "envmpc/envelope/envelope_io.hpp"
#include "envmpc/planner/plan.hpp"
#include "envmpc/planner/road_io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

using namespace envmpc;
using geometry::Point;

namespace {

RoadBoundary straight_road(double length, double half_width, double step = 5.0) {
  const int n = static_cast<int>(std::lround(length / step)) + 1;
  return road_from_profile(std::vector<double>(n, 0.0), std::vector<double>(n, half_width), step);
}

RoadBoundary seeded_road(std::uint64_t seed) { return generate_road(seed, 120, {3.0, 6.0}, 0.08); }

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("envmpc_" + name)).string();
}

}  // namespace

TEST(RoadGenerator, ZeroCurvatureIsStraight) {
  const RoadBoundary r = straight_road(100.0, 4.0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_NEAR(r.centerline[i].x(), 5.0 * i, 1e-12);
    EXPECT_NEAR(r.left[i].y(), 4.0, 1e-12);
    EXPECT_NEAR(r.right[i].y(), -4.0, 1e-12);
    EXPECT_NEAR(r.s[i], 5.0 * i, 1e-9);
  }
}

TEST(RoadGenerator, ConstantCurvatureIsArc) {
  const double c = 0.1;
  const int n = 40;
  const RoadBoundary r = road_from_profile(std::vector<double>(n, c), std::vector<double>(n, 3.0), 1.0);
  // Unit chords turning by c lie on a circle of radius 1 / (2 sin(c/2)).
  const double R = 1.0 / (2.0 * std::sin(0.5 * c));
  // Center: perpendicular bisector of the first chord, turned left.
  const Point a = r.centerline[0];
  const Point b = r.centerline[1];
  const Point mid = 0.5 * (a + b);
  const Point dir = (b - a).normalized();
  const Point center = mid + std::sqrt(R * R - 0.25) * Point(-dir.y(), dir.x());
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR((r.centerline[i] - center).norm(), R, 1e-9) << i;
}

TEST(RoadGenerator, DeterministicPerSeed) {
  EXPECT_EQ(road_to_csv(seeded_road(7)), road_to_csv(seeded_road(7)));
  EXPECT_NE(road_to_csv(seeded_road(7)), road_to_csv(seeded_road(8)));
}

TEST(RoadGenerator, WidthsStayInRange) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const RoadBoundary r = seeded_road(seed);
    for (double w : r.half_widths) {
      EXPECT_GE(w, 3.0 - 1e-9);
      EXPECT_LE(w, 6.0 + 1e-9);
    }
  }
}

TEST(RoadGenerator, RejectsDegenerateInput) {
  EXPECT_THROW(generate_road(0, 50, {0.0, 2.0}, 0.05), std::invalid_argument);
  EXPECT_THROW(generate_road(0, 50, {3.0, 2.0}, 0.05), std::invalid_argument);
  EXPECT_THROW(generate_road(0, 50, {3.0, 6.0}, 1.0), std::invalid_argument);
}

TEST(SavitzkyGolay, PreservesCubics) {
  std::vector<double> y;
  for (int i = 0; i < 40; ++i) y.push_back(0.5 - 0.2 * i + 0.03 * i * i - 0.001 * i * i * i);
  const std::vector<double> s = savitzky_golay(y, 11, 3);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(s[i], y[i], 1e-9) << i;
}

TEST(SavitzkyGolay, SmoothsStep) {
  std::vector<double> y(41, 0.0);
  for (int i = 20; i < 41; ++i) y[i] = 1.0;
  const std::vector<double> s = savitzky_golay(y, 11, 3);
  EXPECT_GT(s[19], 0.0);
  EXPECT_LT(s[20], 1.0);
  EXPECT_THROW(savitzky_golay(y, 10, 3), std::invalid_argument);
}

TEST(AreaSplit, FullyInside) {
  const RoadBoundary r = straight_road(100.0, 4.0);
  BlockDesign b{5.0, 1.5, Point(20.0, 0.0), 0.0};
  const AreaSplit a = block_area_split(b, r);
  EXPECT_NEAR(a.in, 4.0 * 5.0 * 1.5, 1e-9);
  EXPECT_NEAR(a.out, 0.0, 1e-9);
}

TEST(AreaSplit, FullyOutside) {
  const RoadBoundary r = straight_road(100.0, 4.0);
  BlockDesign b{5.0, 1.5, Point(20.0, 20.0), 0.0};
  EXPECT_EQ(block_area_split(b, r).in, 0.0);
}

TEST(AreaSplit, HalfOverBoundary) {
  const RoadBoundary r = straight_road(100.0, 4.0);
  // Centered on the left boundary line y = 4: half of the rectangle lies out.
  BlockDesign b{5.0, 1.5, Point(20.0, 4.0), 0.0};
  const AreaSplit a = block_area_split(b, r);
  EXPECT_NEAR(a.in, 2.0 * 5.0 * 1.5, 1e-9);
  EXPECT_NEAR(a.out, 2.0 * 5.0 * 1.5, 1e-9);
}

TEST(Reward, Examples) {
  EXPECT_DOUBLE_EQ(reward(5.0, 25.0, 5.0), 200.0);
  EXPECT_DOUBLE_EQ(reward(3.0, 7.0, 7.0), 0.0);
  const RoadBoundary r = straight_road(100.0, 4.0);
  const BlockDesign b{5.0, 1.5, Point(20.0, 0.0), 0.0};
  EXPECT_NEAR(reward(b, QuadIndex(r)), 8.0 * 25.0 * 1.5, 1e-9);
}

TEST(Heuristic, StraightRoadClosedForm) {
  const RoadBoundary r = straight_road(120.0, 4.0);
  const QuadIndex idx(r);
  const BlockDesign b = init_block_heuristic(r, idx, 0.0);
  EXPECT_NEAR(b.W, 3.2, 1e-12);
  EXPECT_NEAR(2.0 * b.L, 0.8 * 120.0, 0.8 * 0.01 * 120.0);
  EXPECT_LE(2.0 * b.L, 0.8 * 120.0 + 1e-9);
  EXPECT_LE(block_area_split(b, idx).out, 1e-12 * b.area());

  const BlockDesign later = init_block_heuristic(r, idx, 100.0);
  EXPECT_NEAR(2.0 * later.L, 0.8 * 20.0, 0.8 * 0.01 * 20.0);
}

TEST(Heuristic, CurvatureAheadShortensBlock) {
  const int n = 40;
  std::vector<double> kappa(n, 0.0);
  for (int i = 8; i < 20; ++i) kappa[i] = 0.2;
  const RoadBoundary bent = road_from_profile(kappa, std::vector<double>(n, 4.0));
  const RoadBoundary straight = straight_road(5.0 * (n - 1), 4.0);
  const BlockDesign a = init_block_heuristic(straight, QuadIndex(straight), 0.0);
  const BlockDesign b = init_block_heuristic(bent, QuadIndex(bent), 0.0);
  EXPECT_LT(b.L, a.L);
}

TEST(Heuristic, AlwaysContainedOnGeneratedRoads) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const RoadBoundary r = seeded_road(seed);
    const QuadIndex idx(r);
    for (double s = 0.0; s < r.length() - 1.0; s += 37.0) {
      const BlockDesign b = init_block_heuristic(r, idx, s);
      ASSERT_LE(block_area_split(b, idx).out, 1e-12 * b.area()) << "seed " << seed << " s " << s;
    }
  }
}

TEST(OptimizeBlock, StraightRoadReachesFullWidth) {
  const RoadBoundary r = straight_road(120.0, 4.0);
  const QuadIndex idx(r);
  const BlockDesign init = init_block_heuristic(r, idx, 0.0);
  const BlockOptimizeResult res = optimize_block(init, r);
  EXPECT_EQ(res.status, BlockStatus::improved);
  EXPECT_NEAR(res.design.W, 4.0, 0.04);
  EXPECT_GE(res.design.L * res.design.W, init.L * init.W);
  EXPECT_LE(block_area_split(res.design, idx).out, 1e-6 * res.design.area());
}

TEST(OptimizeBlock, OptimumIsFixedPoint) {
  const RoadBoundary r = seeded_road(3);
  const QuadIndex idx(r);
  const BlockDesign init = init_block_heuristic(r, idx, 50.0);
  const BlockDesign best = optimize_block(init, r).design;
  const BlockOptimizeResult again = optimize_block(best, r);
  EXPECT_NEAR(again.design.L, best.L, 1e-2);
  EXPECT_NEAR(again.design.W, best.W, 1e-2);
  EXPECT_NEAR(again.design.theta, best.theta, 1e-3);
  EXPECT_LE(std::abs(again.design.L * again.design.W - best.L * best.W), 1e-2 * best.L * best.W);
}

TEST(OptimizeBlock, UnrecoverableInitReturnedUnchanged) {
  const RoadBoundary r = straight_road(100.0, 4.0);
  const BlockDesign far{5.0, 2.0, Point(30.0, 50.0), 0.0};
  const BlockOptimizeResult res = optimize_block(far, QuadIndex(r), Point(0.0, 1.0));
  EXPECT_EQ(res.status, BlockStatus::failed);
  EXPECT_EQ(res.design.C, far.C);
  EXPECT_EQ(res.design.L, far.L);
  EXPECT_EQ(res.design.W, far.W);
}

TEST(PlanEnvelope, StraightRoadLayout) {
  const RoadBoundary r = straight_road(120.0, 4.0);
  const PlannedEnvelope p = plan_envelope(r);
  ASSERT_GE(p.blocks.size(), 1u);
  EXPECT_LE(p.blocks.size(), 3u);
  for (const PlannedBlock& b : p.blocks) EXPECT_NEAR(b.design.W, 4.0, 0.04);
}

TEST(PlanEnvelope, SeededRoadsAreFeasibleMonotoneAndConnected) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const RoadBoundary r = seeded_road(seed);
    PlannerOptions opt;
    opt.finalize = false;
    const PlannedEnvelope p = plan_envelope(r, opt);
    ASSERT_FALSE(p.blocks.empty());
    for (std::size_t i = 0; i < p.blocks.size(); ++i) {
      const PlannedBlock& b = p.blocks[i];
      EXPECT_LE(b.area.out, 1e-6 * b.design.area()) << "seed " << seed << " block " << i;
      EXPECT_GE(b.design.L * b.design.W, b.init.L * b.init.W) << "seed " << seed << " block " << i;
      if (i > 0) {
        EXPECT_GT(rectangle_overlap_area(p.blocks[i - 1].design.to_block(), b.design.to_block()), 0.0)
            << "seed " << seed << " pair " << i;
      }
    }
  }
}

TEST(PlanEnvelope, BlocksStayOnRoadMonteCarlo) {
  const RoadBoundary r = seeded_road(11);
  const PlannedEnvelope p = plan_envelope(r);
  const geometry::Polygon road_poly = r.polygon();
  const geometry::Box box = p.envelope.bounding_box();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(box.lo.x(), box.hi.x());
  std::uniform_real_distribution<double> uy(box.lo.y(), box.hi.y());
  int inside = 0;
  int false_feasible = 0;
  for (int k = 0; k < 100000; ++k) {
    const double x = ux(rng);
    const double y = uy(rng);
    if (p.envelope.exact_membership(x, y) <= 0.0) {
      ++inside;
      EXPECT_TRUE(geometry::contains(road_poly, Point(x, y))) << x << "," << y;
    }
    if (p.envelope.constraint(x, y) <= 0.0 && p.envelope.exact_membership(x, y) > 0.0) ++false_feasible;
  }
  EXPECT_GT(inside, 1000);
  EXPECT_EQ(false_feasible, 0);
}

TEST(PlanEnvelope, ByteIdenticalReruns) {
  const RoadBoundary r = seeded_road(21);
  EXPECT_EQ(envelope_to_string(plan_envelope(r).envelope), envelope_to_string(plan_envelope(r).envelope));
}

TEST(PlanEnvelope, ClosedRoadWraps) {
  const int n = 126;
  const double c = 2.0 * std::numbers::pi / (n - 1);
  std::vector<double> kappa(n, c);
  kappa[0] = 0.0;
  RoadBoundary ring = road_from_profile(kappa, std::vector<double>(n, 4.0), 3.0);
  ring.left.back() = ring.left.front();
  ring.right.back() = ring.right.front();
  ring = RoadBoundary::from_sides(ring.left, ring.right, true);
  const PlannedEnvelope p = plan_envelope(ring);
  ASSERT_GE(p.blocks.size(), 3u);
  EXPECT_GT(rectangle_overlap_area(p.blocks.back().design.to_block(), p.blocks.front().design.to_block()), 0.0);
}

TEST(PlanEnvelope, TooShortRoadRejected) {
  EXPECT_THROW(plan_envelope(straight_road(0.5, 4.0, 0.5)), PlanningError);
}

TEST(TrackIo, PlannerFileRoundTrip) {
  const RoadBoundary r = seeded_road(4);
  const std::string path = temp_path("roundtrip.csv");
  save_road(r, path);
  const RoadBoundary back = load_track(path, false, 2.0);
  // Source stations every 5 m and resampled ones every 2 m share multiples of 10 m.
  const RoadBoundary raw = load_track(path, false, 0.0);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    EXPECT_NEAR((raw.left[i] - r.left[i]).norm(), 0.0, 1e-12);
  }
  for (std::size_t i = 0; i < back.size(); ++i) {
    const double s = back.s[i];
    const double k = s / 10.0;
    if (std::abs(k - std::round(k)) > 1e-9) continue;
    const std::size_t j = static_cast<std::size_t>(std::lround(s / r.s[1]));
    if (std::abs(r.s[j] - s) > 1e-6) continue;
    EXPECT_LT((back.left[i] - r.left[j]).norm(), 1e-6) << s;
    EXPECT_LT((back.right[i] - r.right[j]).norm(), 1e-6) << s;
  }
  std::filesystem::remove(path);
}

TEST(TrackIo, StraightRowsGiveMidline) {
  const RoadBoundary r = road_from_csv("left_x,left_y,right_x,right_y\n0,3,0,-1\n10,3,10,-1\n");
  EXPECT_NEAR(r.centerline[0].y(), 1.0, 1e-12);
  EXPECT_NEAR(r.centerline[1].x(), 10.0, 1e-12);
  EXPECT_NEAR(r.half_widths[1], 2.0, 1e-12);
}

TEST(TrackIo, CircleHasConstantHalfWidth) {
  std::string csv = "left_x,left_y,right_x,right_y\n";
  const int n = 20000;
  for (int i = 0; i <= n; ++i) {
    const double a = 2.0 * std::numbers::pi * (i == n ? 0 : i) / n;
    char row[200];
    std::snprintf(row, sizeof row, "%.17g,%.17g,%.17g,%.17g\n", 46.0 * std::cos(a), 46.0 * std::sin(a),
                  54.0 * std::cos(a), 54.0 * std::sin(a));
    csv += row;
  }
  const std::string path = temp_path("circle.csv");
  std::ofstream(path) << csv;
  const RoadBoundary r = load_track(path, true, 2.0);
  for (double w : r.half_widths) EXPECT_NEAR(w, 4.0, 1e-6);
  EXPECT_LT((r.centerline.front() - r.centerline.back()).norm(), 1e-9);
  std::filesystem::remove(path);
}

TEST(TrackIo, RejectsMalformedInput) {
  EXPECT_THROW(road_from_csv("0,1,2\n0,1,2\n"), TrackFormatError);
  EXPECT_THROW(road_from_csv("0,1,2,x\n1,1,2,3\n"), TrackFormatError);
  EXPECT_THROW(road_from_csv("0,1,0,-1\n0,1,0,-1\n"), TrackFormatError);
  EXPECT_THROW(road_from_csv("0,1,0,-1\n10,1,10,-1\n", true), TrackFormatError);
  EXPECT_THROW(load_track("/nonexistent/track.csv"), TrackFormatError);
}
