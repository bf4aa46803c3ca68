// Plans an envelope over a generated road and prints its blocks.
#include "envmpc/planner/plan.hpp"

#include <cstdio>
#include <cstdlib>

using namespace envmpc;

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 7;
  const RoadBoundary road = generate_road(seed, 120, {3.0, 6.0}, 0.08);
  const PlannedEnvelope p = plan_envelope(road);
  std::printf("road seed %llu, %.1f m, %zu blocks, epsilon0 %.4g, %d area evaluations in %.1f ms\n",
              static_cast<unsigned long long>(seed), road.length(), p.blocks.size(), p.envelope.epsilon0(),
              p.evaluations, p.design_ms);
  std::printf("%8s %9s %9s %7s %6s %6s  %s\n", "station", "x", "y", "psi", "L", "W", "status");
  for (const PlannedBlock& b : p.blocks) {
    const EnvelopeBlock e = b.design.to_block();
    std::printf("%8.1f %9.2f %9.2f %7.3f %6.2f %6.2f  %s\n", b.station, e.xb, e.yb, e.psib, e.Lb, e.Wb,
                to_string(b.status));
  }
}
