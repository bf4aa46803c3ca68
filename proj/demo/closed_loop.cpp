// Five seconds of the shipped oval scenario, printed once per second.
#include "envmpc/sim/record_io.hpp"
#include "envmpc/sim/run.hpp"

#include <cstdio>

using namespace envmpc;

int main() {
  Scenario sc = Scenario::load(std::string(ENVMPC_DATA_DIR) + "/scenarios/oval_racing.cfg");
  sc.termination = Termination::time;
  sc.max_time = 5.0;
  RunOptions opt;
  opt.on_tick = [](const TickRecord& t) {
    if (static_cast<int>(std::lround(t.t * 10)) % 10 != 0) return;
    std::printf("t %4.1f s  station %6.1f m  ux %5.2f m/s  %s in %d iterations\n", t.t, t.station, t.state.ux,
                t.solved ? to_string(t.status) : "-", t.iterations);
  };
  const RunRecord rec = run_scenario(sc, opt);
  const SolveTimeStats st = solve_time_stats(rec);
  std::printf("%s: %ld violations, max accel %.2f m/s^2, median solve %.1f ms\n", rec.status.c_str(),
              rec.metrics.violations, rec.metrics.max_total_accel, st.median_ms);
}
