#pragma once

#include <utility>
#include <vector>

namespace bshuf {

// Piecewise-constant, right-continuous map from time to a set of censored
// edges. Edge x stands for {x, x+1}, x in [N-1]. Segment i is active on
// [breakpoints[i-1], breakpoints[i]), with segment 0 starting at time 0 and
// the last segment unbounded; edge_sets.size() == breakpoints.size() + 1.
struct CensoringSchedule {
  std::vector<double> breakpoints;
  std::vector<std::vector<int>> edge_sets;  // each sorted ascending

  const std::vector<int>& at(double t) const;
  bool empty_at(double t) const { return at(t).empty(); }
  static CensoringSchedule constant(std::vector<int> edges);
};

// Maximal runs of [lo,hi] not straddling any censored edge.
std::vector<std::pair<int, int>> censored_partition(
    int lo, int hi, const std::vector<int>& edges);

struct CutoffCensoring {
  CensoringSchedule schedule;
  double t1 = 0.0, t2 = 0.0, t3 = 0.0;
};

// Censors the anchor edges {x_i, x_i+1}, x_i = ceil(i*N/K), on
// [0,t1) u [t2,t3) with
//   t1 = delta*N^2*log(N)/(3k^3),
//   t2 = (2*delta/3 + 4/pi^2)*N^2*log(N)/k^3,
//   t3 = (delta + 4/pi^2)*N^2*log(N)/k^3.
CutoffCensoring make_cutoff_censoring(int N, int k, int K, double delta);

}  // namespace bshuf
