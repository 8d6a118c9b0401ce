#include "blockshuffle/censoring.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bshuf {

const std::vector<int>& CensoringSchedule::at(double t) const {
  if (edge_sets.size() != breakpoints.size() + 1)
    throw std::logic_error("CensoringSchedule: malformed segments");
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
  return edge_sets[static_cast<std::size_t>(it - breakpoints.begin())];
}

CensoringSchedule CensoringSchedule::constant(std::vector<int> edges) {
  std::sort(edges.begin(), edges.end());
  CensoringSchedule s;
  s.edge_sets.push_back(std::move(edges));
  return s;
}

std::vector<std::pair<int, int>> censored_partition(
    int lo, int hi, const std::vector<int>& edges) {
  std::vector<std::pair<int, int>> out;
  int start = lo;
  for (int x : edges) {
    if (x >= lo && x < hi) {
      out.emplace_back(start, x);
      start = x + 1;
    }
  }
  out.emplace_back(start, hi);
  return out;
}

CutoffCensoring make_cutoff_censoring(int N, int k, int K, double delta) {
  if (delta <= 0.0) throw std::invalid_argument("make_cutoff_censoring: delta > 0");
  if (K < 2) throw std::invalid_argument("make_cutoff_censoring: K >= 2");
  const double scale = static_cast<double>(N) * N * std::log(static_cast<double>(N)) /
                       (static_cast<double>(k) * k * k);
  const double four_pi2 = 4.0 / (std::numbers::pi * std::numbers::pi);
  CutoffCensoring out;
  out.t1 = delta / 3.0 * scale;
  out.t2 = (2.0 * delta / 3.0 + four_pi2) * scale;
  out.t3 = (delta + four_pi2) * scale;

  std::vector<int> edges;
  for (int i = 1; i <= K; ++i) {
    const int x = static_cast<int>((static_cast<long long>(i) * N + K - 1) / K);
    if (x <= N - 1) edges.push_back(x);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  out.schedule.breakpoints = {out.t1, out.t2, out.t3};
  out.schedule.edge_sets = {edges, {}, edges, {}};
  return out;
}

}  // namespace bshuf
