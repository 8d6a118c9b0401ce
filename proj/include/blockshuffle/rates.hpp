#pragma once

#include <string>
#include <vector>

#include "blockshuffle/rational.hpp"

namespace bshuf {

// plain: rate-1 windows of k consecutive positions only.
// with_boundaries: extra prefix/suffix updates of the first/last i cards at
//   the delta rates that make sine-profile height statistics approximate
//   eigenfunctions.
// boundaries_capped: the same prefix/suffix blocks with every delta capped at
//   1 (the [0,1]-rate regime used for sub-deck comparisons).
enum class Variant { plain, with_boundaries, boundaries_capped };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& s);

struct ShuffleSpec {
  Variant variant = Variant::plain;
  int N = 0;
  int k = 0;
  // The generator's printed bulk range stops at N-k, leaving position N
  // outside every window; the default covers 1..N-k+1 so that both deck ends
  // are treated alike. The literal range is kept behind this flag for
  // comparison runs.
  bool literal_block_range = false;
  double rate_scale = 1.0;
};

// delta_i^(k) = (k^2 + 3i^2 - 1) / ((2i+1)(2i-1)) for 2 <= i <= k-1, k >= 3.
Rat boundary_rate(int k, int i);

// All tabulated boundary rates, indexed i = 2..k-1 (empty for k <= 3... k=2).
std::vector<Rat> boundary_rates(int k);

struct Interval {
  int lo = 0;
  int hi = 0;
  double rate = 0.0;
};

struct RateTable {
  int N = 0;
  int k = 0;
  Variant variant = Variant::plain;
  bool literal_range = false;
  double rate_scale = 1.0;
  int n_bulk = 0;  // intervals[0..n_bulk) are the rate-1 windows
  std::vector<Interval> intervals;
  std::vector<Rat> exact_rates;  // parallel to intervals, before rate_scale
  std::vector<double> cum;       // cumulative rates for categorical sampling
  double total_rate = 0.0;

  // Index of the interval containing u in [0, total_rate).
  int pick(double u) const;
};

RateTable make_rate_table(const ShuffleSpec& spec);

}  // namespace bshuf
