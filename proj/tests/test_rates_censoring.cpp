#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "blockshuffle/censoring.hpp"
#include "blockshuffle/rates.hpp"

using namespace bshuf;

TEST_CASE("boundary rates match hand-derived values") {
  CHECK(boundary_rate(3, 2) == Rat(4, 3));
  CHECK(boundary_rate(4, 2) == Rat(9, 5));
  CHECK(boundary_rate(4, 3) == Rat(6, 5));
  CHECK_THROWS(boundary_rate(2, 2));
  CHECK_THROWS(boundary_rate(4, 1));
  CHECK_THROWS(boundary_rate(4, 4));
  CHECK(boundary_rates(2).empty());
  CHECK(boundary_rates(3).size() == 1);
}

TEST_CASE("boundary rates agree with the offset-index form") {
  // The defining expression indexes prefix length x = k - i with i in
  // [1, k-2]: numerator 4k^2 - 6ik + 3i^2 - 1 over (2x+1)(2x-1).
  for (int k = 3; k <= 64; ++k) {
    for (int x = 2; x <= k - 1; ++x) {
      const long long i = k - x;
      const Rat literal(4LL * k * k - 6 * i * k + 3 * i * i - 1,
                        (2LL * x + 1) * (2LL * x - 1));
      CHECK(boundary_rate(k, x) == literal);
    }
  }
}

TEST_CASE("boundary rate bounds") {
  for (int k = 3; k <= 64; ++k) {
    for (int i = 2; i <= k - 1; ++i) {
      const Rat d = boundary_rate(k, i);
      CHECK(d >= Rat(1));
      CHECK(d <= Rat(7LL * k * k, 4LL * i * i - 1));
      if (4 * i >= k) CHECK(d <= Rat(8));
    }
  }
}

TEST_CASE("rate table shapes") {
  {
    const RateTable t = make_rate_table({Variant::plain, 5, 2});
    CHECK(t.intervals.size() == 4);
    CHECK(t.n_bulk == 4);
    CHECK(t.total_rate == doctest::Approx(4.0));
    CHECK(t.intervals[0].lo == 1);
    CHECK(t.intervals[3].hi == 5);
  }
  {
    const RateTable t = make_rate_table({Variant::with_boundaries, 6, 3});
    CHECK(t.n_bulk == 4);
    CHECK(t.intervals.size() == 6);
    Rat total(0);
    for (const Rat& r : t.exact_rates) total += r;
    CHECK(total == Rat(4) + Rat(8, 3));
    CHECK(t.intervals[4].lo == 1);
    CHECK(t.intervals[4].hi == 2);
    CHECK(t.intervals[5].lo == 5);
    CHECK(t.intervals[5].hi == 6);
    CHECK(t.exact_rates[4] == Rat(4, 3));
  }
  {
    // k=2 with boundaries has no extra blocks.
    const RateTable a = make_rate_table({Variant::plain, 7, 2});
    const RateTable b = make_rate_table({Variant::with_boundaries, 7, 2});
    CHECK(a.intervals.size() == b.intervals.size());
    CHECK(a.total_rate == b.total_rate);
  }
  {
    // Literal range drops the last window.
    ShuffleSpec s{Variant::plain, 5, 2};
    s.literal_block_range = true;
    const RateTable t = make_rate_table(s);
    CHECK(t.intervals.size() == 3);
    CHECK(t.intervals.back().hi == 4);
  }
  {
    // Capped variant pins boundary rates at 1.
    const RateTable t = make_rate_table({Variant::boundaries_capped, 8, 4});
    for (std::size_t i = static_cast<std::size_t>(t.n_bulk);
         i < t.intervals.size(); ++i)
      CHECK(t.intervals[i].rate == doctest::Approx(1.0));
  }
  CHECK_THROWS(make_rate_table({Variant::plain, 5, 6}));
  CHECK_THROWS(make_rate_table({Variant::plain, 5, 1}));
}

TEST_CASE("censored partition") {
  using P = std::vector<std::pair<int, int>>;
  CHECK(censored_partition(3, 7, {5}) == P{{3, 5}, {6, 7}});
  CHECK(censored_partition(3, 7, {}) == P{{3, 7}});
  CHECK(censored_partition(3, 7, {1, 8}) == P{{3, 7}});
  CHECK(censored_partition(1, 4, {1, 3}) == P{{1, 1}, {2, 3}, {4, 4}});
}

TEST_CASE("cutoff censoring schedule") {
  const int N = 100, k = 3, K = 4;
  const double delta = 0.5;
  const CutoffCensoring cc = make_cutoff_censoring(N, k, K, delta);
  const double scale = N * N * std::log(static_cast<double>(N)) / (k * k * k);
  const double fp = 4.0 / (std::numbers::pi * std::numbers::pi);
  CHECK(cc.t1 == doctest::Approx(delta / 3 * scale).epsilon(1e-14));
  CHECK(cc.t2 == doctest::Approx((2 * delta / 3 + fp) * scale).epsilon(1e-14));
  CHECK(cc.t3 == doctest::Approx((delta + fp) * scale).epsilon(1e-14));

  // Censored anchors {25,50,75}; x=100 has no edge.
  CHECK(cc.schedule.at(0.0) == std::vector<int>{25, 50, 75});
  // Right continuity: empty exactly at t1, full exactly at t2, empty at t3.
  CHECK(cc.schedule.at(cc.t1).empty());
  CHECK(cc.schedule.at(0.5 * (cc.t1 + cc.t2)).empty());
  CHECK(cc.schedule.at(cc.t2) == std::vector<int>{25, 50, 75});
  CHECK(cc.schedule.at(0.5 * (cc.t2 + cc.t3)).size() == 3);
  CHECK(cc.schedule.at(cc.t3).empty());
  CHECK(cc.schedule.at(cc.t3 * 10).empty());

  CHECK_THROWS(make_cutoff_censoring(N, k, 1, delta));
  CHECK_THROWS(make_cutoff_censoring(N, k, K, 0.0));
}
