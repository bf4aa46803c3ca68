#pragma once

#include <numeric>
#include <stdexcept>
#include <vector>

namespace envmpc {

/// Non-uniform collocation grid: interval durations T_0..T_{N-1}.
struct CollocationGrid {
  std::vector<double> T;

  /// 15 intervals of 0.15 s followed by 9 of 0.5 s: 25 points, 6.75 s.
  static CollocationGrid standard() {
    CollocationGrid g;
    g.T.assign(15, 0.15);
    g.T.insert(g.T.end(), 9, 0.5);
    return g;
  }

  int intervals() const { return static_cast<int>(T.size()); }
  int points() const { return intervals() + 1; }
  double horizon() const { return std::accumulate(T.begin(), T.end(), 0.0); }

  /// Time of each collocation point relative to the horizon start.
  std::vector<double> times() const {
    std::vector<double> t(T.size() + 1, 0.0);
    for (std::size_t i = 0; i < T.size(); ++i) t[i + 1] = t[i] + T[i];
    return t;
  }

  void validate() const {
    if (T.empty()) throw std::invalid_argument("collocation grid has no intervals");
    for (double d : T) {
      if (!(d > 0.0)) throw std::invalid_argument("collocation interval durations must be positive");
    }
  }
};

}  // namespace envmpc
