#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "blockshuffle/censoring.hpp"
#include "blockshuffle/permutation.hpp"
#include "blockshuffle/rates.hpp"
#include "blockshuffle/rng.hpp"

namespace bshuf {

// One Poisson-clock ring. The block permutation is sampled lazily at
// application time, so a censored and an uncensored run can share the
// (time, interval) stream while drawing blocks from their own streams.
struct UpdateEvent {
  double time = 0.0;
  int lo = 0;
  int hi = 0;
};

UpdateEvent sample_next_event(Rng& rng, const RateTable& table, double t_now);

// Applies one uniform shuffle to [lo,hi]; with censoring, independent uniform
// shuffles to each censored-partition piece (singletons are no-ops).
void step_inplace(std::vector<std::int32_t>& labels, const UpdateEvent& ev,
                  const CensoringSchedule* schedule, Rng& block_rng);

Permutation step(const Permutation& eta, const UpdateEvent& ev,
                 const CensoringSchedule* schedule, Rng& block_rng);

struct Observer {
  std::vector<double> times;  // ascending
  std::function<void(double, const Permutation&)> fn;
};

// Event loop: applies all events with time <= T in order; observers fire at
// their sampling times with the state at that time.
Permutation simulate(const Permutation& eta0, double T, const RateTable& table,
                     const CensoringSchedule* schedule, Rng& rng,
                     std::vector<Observer> observers = {});

// Fast endpoint path (no censoring, no observers): the state at time T given
// n rings is the composition of n independent updates, so a Poisson count of
// updates is applied without generating event times.
void apply_uniform_updates(std::vector<std::int32_t>& labels, long long n,
                           const RateTable& table, Rng& rng);
Permutation simulate_endpoint(const Permutation& eta0, double T,
                              const RateTable& table, Rng& rng);

// Shared-clock paired run from the same start: both copies consume one
// (time, interval) stream; block permutations come from per-copy streams
// (or one shared stream, for the identical-run check).
std::pair<Permutation, Permutation> simulate_paired(
    const Permutation& eta0, double T, const RateTable& table,
    const CensoringSchedule* schedule_a, const CensoringSchedule* schedule_b,
    Rng& clock_rng, Rng& block_rng_a, Rng& block_rng_b,
    bool share_blocks = false);

// Canonical two-copy coupling: labels agreeing in position are placed
// identically on a uniformly chosen set of window positions; the remaining
// positions are filled independently and uniformly in each copy. Each
// marginal is a legal uniform block update and agreement never shrinks.
struct CoupledDecks {
  std::vector<std::int32_t> a, b;      // labels by position (0-based storage)
  std::vector<std::int32_t> pa, pb;    // position of each label
  int n_agree = 0;

  CoupledDecks(const Permutation& x, const Permutation& y);
  Permutation first() const { return Permutation(a); }
  Permutation second() const { return Permutation(b); }
};

void coupled_step_inplace(CoupledDecks& d, int lo, int hi, Rng& rng);

std::pair<Permutation, Permutation> coupled_step(const Permutation& eta,
                                                 const Permutation& eta2,
                                                 const UpdateEvent& ev,
                                                 Rng& rng);

struct CoalescenceResult {
  std::vector<double> tau;         // per label; meaningful iff done[label]
  std::vector<std::uint8_t> done;  // exceeded-horizon labels stay 0
  double tau_all = 0.0;            // max tau, valid iff coalesced
  bool coalesced = false;
};

CoalescenceResult coalescence_times(const Permutation& eta0,
                                    const Permutation& eta02,
                                    const RateTable& table, Rng& rng,
                                    double horizon);

// Marginal motion of a single card: an interval ring that covers the card
// moves it to a uniform position inside the interval; other rings are
// irrelevant, so only covering intervals are simulated.
struct ExitTime {
  double t = 0.0;
  bool exited = false;
};

// First time the card starting at start_pos reaches a position > threshold.
ExitTime single_card_exit_time(const RateTable& table, int start_pos,
                               int threshold, double horizon, Rng& rng);

}  // namespace bshuf
