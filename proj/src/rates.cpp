#include "blockshuffle/rates.hpp"

#include <algorithm>
#include <stdexcept>

namespace bshuf {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::plain:
      return "plain";
    case Variant::with_boundaries:
      return "with_boundaries";
    case Variant::boundaries_capped:
      return "boundaries_capped";
  }
  return "?";
}

Variant variant_from_name(const std::string& s) {
  if (s == "plain") return Variant::plain;
  if (s == "with_boundaries") return Variant::with_boundaries;
  if (s == "boundaries_capped") return Variant::boundaries_capped;
  throw std::invalid_argument("unknown variant: " + s);
}

Rat boundary_rate(int k, int i) {
  if (k < 3) throw std::out_of_range("boundary_rate: k >= 3");
  if (i < 2 || i > k - 1) throw std::out_of_range("boundary_rate: i in [2,k-1]");
  const long long kk = k, ii = i;
  return Rat(kk * kk + 3 * ii * ii - 1, (2 * ii + 1) * (2 * ii - 1));
}

std::vector<Rat> boundary_rates(int k) {
  std::vector<Rat> out;
  for (int i = 2; i <= k - 1; ++i) out.push_back(boundary_rate(k, i));
  return out;
}

int RateTable::pick(double u) const {
  const auto it = std::upper_bound(cum.begin(), cum.end(), u);
  auto idx = static_cast<std::size_t>(it - cum.begin());
  if (idx >= intervals.size()) idx = intervals.size() - 1;
  return static_cast<int>(idx);
}

RateTable make_rate_table(const ShuffleSpec& spec) {
  const int N = spec.N, k = spec.k;
  if (N < 2 || k < 2 || k > N)
    throw std::invalid_argument("make_rate_table: need 2 <= k <= N");
  RateTable t;
  t.N = N;
  t.k = k;
  t.variant = spec.variant;
  t.literal_range = spec.literal_block_range;
  t.rate_scale = spec.rate_scale;

  const int bulk_hi = spec.literal_block_range ? N - k : N - k + 1;
  for (int i = 1; i <= bulk_hi; ++i) {
    t.intervals.push_back({i, i + k - 1, spec.rate_scale});
    t.exact_rates.emplace_back(1);
  }
  t.n_bulk = static_cast<int>(t.intervals.size());

  if (spec.variant != Variant::plain) {
    for (int i = 2; i <= k - 1; ++i) {
      Rat d = boundary_rate(k, i);
      if (spec.variant == Variant::boundaries_capped && d > Rat(1)) d = Rat(1);
      const double rd = d.to_double() * spec.rate_scale;
      t.intervals.push_back({1, i, rd});
      t.exact_rates.push_back(d);
      t.intervals.push_back({N - i + 1, N, rd});
      t.exact_rates.push_back(d);
    }
  }

  t.cum.resize(t.intervals.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < t.intervals.size(); ++i) {
    acc += t.intervals[i].rate;
    t.cum[i] = acc;
  }
  t.total_rate = acc;
  return t;
}

}  // namespace bshuf
