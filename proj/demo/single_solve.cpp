// One optimal control solve on a straight 10 m wide corridor at 20 m/s.
#include "envmpc/ocp/solve.hpp"

#include <cstdio>

using namespace envmpc;

int main() {
  std::vector<EnvelopeBlock> blocks;
  for (double x = -20.0; x < 400.0; x += 40.0) blocks.push_back({x, 0.0, 0.0, 25.0, 5.0, 4});
  OcpProblem p;
  p.x0.ux = 20.0;
  p.x0.y = 2.0;
  p.bounds = LinearBounds::for_vehicle(p.params);
  p.envelope = SpatialEnvelope::finalize(blocks);

  const OcpSolution s = solve_ocp(p);
  std::printf("status %s after %d iterations, %.1f ms, objective %.4f\n", to_string(s.status), s.iterations,
              s.solve_time_ms, s.objective);
  std::printf("%6s %8s %7s %7s %8s %7s\n", "t", "x", "y", "ux", "delta_f", "ax");
  const auto times = p.grid.times();
  for (std::size_t k = 0; k < s.states.size(); ++k) {
    const VehicleState& v = s.states[k];
    std::printf("%6.2f %8.2f %7.3f %7.3f %8.4f %7.3f\n", times[k], v.x, v.y, v.ux, v.delta_f, v.ax);
  }
}
