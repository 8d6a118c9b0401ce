#include "blockshuffle/dynamics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace bshuf {

UpdateEvent sample_next_event(Rng& rng, const RateTable& table, double t_now) {
  if (table.total_rate <= 0.0)
    throw std::logic_error("sample_next_event: total rate is zero");
  const double wait = rng.exponential(table.total_rate);
  const double u = rng.uniform() * table.total_rate;
  const Interval& iv = table.intervals[static_cast<std::size_t>(table.pick(u))];
  return {t_now + wait, iv.lo, iv.hi};
}

namespace {

inline void shuffle_window(std::vector<std::int32_t>& labels, int lo, int hi,
                           Rng& rng) {
  for (int m = hi; m > lo; --m) {
    const int j = lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(m - lo + 1)));
    std::swap(labels[static_cast<std::size_t>(m - 1)],
              labels[static_cast<std::size_t>(j - 1)]);
  }
}

inline bool any_edge_inside(const std::vector<int>& edges, int lo, int hi) {
  const auto it = std::lower_bound(edges.begin(), edges.end(), lo);
  return it != edges.end() && *it < hi;
}

}  // namespace

void step_inplace(std::vector<std::int32_t>& labels, const UpdateEvent& ev,
                  const CensoringSchedule* schedule, Rng& block_rng) {
  if (schedule != nullptr) {
    const auto& edges = schedule->at(ev.time);
    if (any_edge_inside(edges, ev.lo, ev.hi)) {
      for (const auto& [lo, hi] : censored_partition(ev.lo, ev.hi, edges)) {
        shuffle_window(labels, lo, hi, block_rng);
      }
      return;
    }
  }
  shuffle_window(labels, ev.lo, ev.hi, block_rng);
}

Permutation step(const Permutation& eta, const UpdateEvent& ev,
                 const CensoringSchedule* schedule, Rng& block_rng) {
  if (ev.lo < 1 || ev.hi > eta.n() || ev.lo > ev.hi)
    throw std::out_of_range("step: interval out of range");
  std::vector<std::int32_t> labels(eta.labels().begin(), eta.labels().end());
  step_inplace(labels, ev, schedule, block_rng);
  return Permutation(std::move(labels));
}

Permutation simulate(const Permutation& eta0, double T, const RateTable& table,
                     const CensoringSchedule* schedule, Rng& rng,
                     std::vector<Observer> observers) {
  if (T < 0.0) throw std::invalid_argument("simulate: T >= 0");
  std::vector<std::int32_t> labels(eta0.labels().begin(), eta0.labels().end());
  std::vector<std::size_t> next_obs(observers.size(), 0);

  const auto fire_until = [&](double t_limit) {
    for (std::size_t o = 0; o < observers.size(); ++o) {
      auto& obs = observers[o];
      while (next_obs[o] < obs.times.size() &&
             obs.times[next_obs[o]] <= t_limit) {
        obs.fn(obs.times[next_obs[o]], Permutation(labels));
        ++next_obs[o];
      }
    }
  };

  double t = 0.0;
  for (;;) {
    const UpdateEvent ev = sample_next_event(rng, table, t);
    if (ev.time > T) break;
    // Observers strictly before the next ring see the current state.
    for (std::size_t o = 0; o < observers.size(); ++o) {
      auto& obs = observers[o];
      while (next_obs[o] < obs.times.size() &&
             obs.times[next_obs[o]] < ev.time && obs.times[next_obs[o]] <= T) {
        obs.fn(obs.times[next_obs[o]], Permutation(labels));
        ++next_obs[o];
      }
    }
    step_inplace(labels, ev, schedule, rng);
    t = ev.time;
  }
  fire_until(T);
  return Permutation(std::move(labels));
}

void apply_uniform_updates(std::vector<std::int32_t>& labels, long long n,
                           const RateTable& table, Rng& rng) {
  for (long long s = 0; s < n; ++s) {
    const double u = rng.uniform() * table.total_rate;
    const Interval& iv = table.intervals[static_cast<std::size_t>(table.pick(u))];
    shuffle_window(labels, iv.lo, iv.hi, rng);
  }
}

Permutation simulate_endpoint(const Permutation& eta0, double T,
                              const RateTable& table, Rng& rng) {
  std::vector<std::int32_t> labels(eta0.labels().begin(), eta0.labels().end());
  const long long n = rng.poisson(table.total_rate * T);
  apply_uniform_updates(labels, n, table, rng);
  return Permutation(std::move(labels));
}

std::pair<Permutation, Permutation> simulate_paired(
    const Permutation& eta0, double T, const RateTable& table,
    const CensoringSchedule* schedule_a, const CensoringSchedule* schedule_b,
    Rng& clock_rng, Rng& block_rng_a, Rng& block_rng_b, bool share_blocks) {
  std::vector<std::int32_t> la(eta0.labels().begin(), eta0.labels().end());
  std::vector<std::int32_t> lb = la;
  double t = 0.0;
  for (;;) {
    const UpdateEvent ev = sample_next_event(clock_rng, table, t);
    if (ev.time > T) break;
    if (share_blocks) {
      // Replay the same block draws in both copies.
      Rng replay = block_rng_a;
      step_inplace(la, ev, schedule_a, block_rng_a);
      step_inplace(lb, ev, schedule_b, replay);
    } else {
      step_inplace(la, ev, schedule_a, block_rng_a);
      step_inplace(lb, ev, schedule_b, block_rng_b);
    }
    t = ev.time;
  }
  return {Permutation(std::move(la)), Permutation(std::move(lb))};
}

CoupledDecks::CoupledDecks(const Permutation& x, const Permutation& y)
    : a(x.labels().begin(), x.labels().end()),
      b(y.labels().begin(), y.labels().end()) {
  if (x.n() != y.n()) throw std::invalid_argument("CoupledDecks: size mismatch");
  pa = positions_of_labels(x);
  pb = positions_of_labels(y);
  for (std::size_t l = 0; l < pa.size(); ++l) n_agree += pa[l] == pb[l];
}

namespace {

// Scratch for coupled window updates, reused across events.
struct CoupleScratch {
  std::vector<std::int32_t> agree, rest_a, rest_b, pos;
};

void coupled_window(CoupledDecks& d, int lo, int hi, Rng& rng,
                    CoupleScratch& sc, std::vector<std::int32_t>* newly) {
  sc.agree.clear();
  sc.rest_a.clear();
  sc.rest_b.clear();
  sc.pos.clear();
  for (int m = lo; m <= hi; ++m) {
    const std::int32_t la = d.a[static_cast<std::size_t>(m - 1)];
    if (d.pb[static_cast<std::size_t>(la - 1)] == m)
      sc.agree.push_back(la);
    else
      sc.rest_a.push_back(la);
    const std::int32_t lb = d.b[static_cast<std::size_t>(m - 1)];
    if (d.pa[static_cast<std::size_t>(lb - 1)] != m) sc.rest_b.push_back(lb);
    sc.pos.push_back(m);
  }
  // Fixed draw order: positions, agreeing arrangement, then each copy's rest.
  rng.shuffle(sc.pos.begin(), sc.pos.end());
  rng.shuffle(sc.agree.begin(), sc.agree.end());
  rng.shuffle(sc.rest_a.begin(), sc.rest_a.end());
  rng.shuffle(sc.rest_b.begin(), sc.rest_b.end());

  const std::size_t na = sc.agree.size();
  for (std::size_t i = 0; i < na; ++i) {
    const int p = sc.pos[i];
    const std::int32_t l = sc.agree[i];
    d.a[static_cast<std::size_t>(p - 1)] = l;
    d.b[static_cast<std::size_t>(p - 1)] = l;
    d.pa[static_cast<std::size_t>(l - 1)] = p;
    d.pb[static_cast<std::size_t>(l - 1)] = p;
  }
  for (std::size_t i = na; i < sc.pos.size(); ++i) {
    const int p = sc.pos[i];
    const std::int32_t la = sc.rest_a[i - na];
    const std::int32_t lb = sc.rest_b[i - na];
    d.a[static_cast<std::size_t>(p - 1)] = la;
    d.pa[static_cast<std::size_t>(la - 1)] = p;
    d.b[static_cast<std::size_t>(p - 1)] = lb;
    d.pb[static_cast<std::size_t>(lb - 1)] = p;
    if (la == lb) {
      ++d.n_agree;
      if (newly != nullptr) newly->push_back(la);
    }
  }
}

}  // namespace

void coupled_step_inplace(CoupledDecks& d, int lo, int hi, Rng& rng) {
  CoupleScratch sc;
  coupled_window(d, lo, hi, rng, sc, nullptr);
}

std::pair<Permutation, Permutation> coupled_step(const Permutation& eta,
                                                 const Permutation& eta2,
                                                 const UpdateEvent& ev,
                                                 Rng& rng) {
  if (ev.lo < 1 || ev.hi > eta.n() || ev.lo > ev.hi)
    throw std::out_of_range("coupled_step: interval out of range");
  CoupledDecks d(eta, eta2);
  coupled_step_inplace(d, ev.lo, ev.hi, rng);
  return {d.first(), d.second()};
}

CoalescenceResult coalescence_times(const Permutation& eta0,
                                    const Permutation& eta02,
                                    const RateTable& table, Rng& rng,
                                    double horizon) {
  if (horizon <= 0.0) throw std::invalid_argument("coalescence_times: horizon > 0");
  const int n = eta0.n();
  CoupledDecks d(eta0, eta02);
  CoalescenceResult res;
  res.tau.assign(static_cast<std::size_t>(n), 0.0);
  res.done.assign(static_cast<std::size_t>(n), 0);
  for (int l = 1; l <= n; ++l) {
    if (d.pa[static_cast<std::size_t>(l - 1)] ==
        d.pb[static_cast<std::size_t>(l - 1)]) {
      res.done[static_cast<std::size_t>(l - 1)] = 1;
    }
  }
  CoupleScratch sc;
  std::vector<std::int32_t> newly;
  double t = 0.0;
  int prev_agree = d.n_agree;
  while (d.n_agree < n) {
    const UpdateEvent ev = sample_next_event(rng, table, t);
    if (ev.time > horizon) return res;
    newly.clear();
    coupled_window(d, ev.lo, ev.hi, rng, sc, &newly);
    if (d.n_agree < prev_agree)
      throw std::logic_error("coalescence_times: agreement shrank");
    prev_agree = d.n_agree;
    for (std::int32_t l : newly) {
      res.tau[static_cast<std::size_t>(l - 1)] = ev.time;
      res.done[static_cast<std::size_t>(l - 1)] = 1;
      res.tau_all = ev.time;
    }
    t = ev.time;
  }
  res.coalesced = true;
  return res;
}

ExitTime single_card_exit_time(const RateTable& table, int start_pos,
                               int threshold, double horizon, Rng& rng) {
  const int N = table.N, k = table.k;
  if (threshold >= N)
    throw std::invalid_argument("single_card_exit_time: threshold < N");
  if (start_pos < 1 || start_pos > N)
    throw std::out_of_range("single_card_exit_time: start position");
  const bool literal = table.literal_range;
  // Suffix sums of boundary rates, tail[i] = sum_{j >= i} delta_j.
  std::vector<double> tail(static_cast<std::size_t>(k + 1), 0.0);
  if (table.variant != Variant::plain) {
    for (int i = k - 1; i >= 2; --i) {
      double d = boundary_rate(k, i).to_double();
      if (table.variant == Variant::boundaries_capped) d = std::min(d, 1.0);
      tail[static_cast<std::size_t>(i)] = tail[static_cast<std::size_t>(i + 1)] + d;
    }
  }
  const double scale = table.rate_scale;

  int x = start_pos;
  double t = 0.0;
  for (;;) {
    if (x > threshold) return {t, true};
    const int bulk_lo = std::max(1, x - k + 1);
    const int bulk_hi = std::min(x, literal ? N - k : N - k + 1);
    const double nb = bulk_hi >= bulk_lo ? bulk_hi - bulk_lo + 1 : 0;
    const double pre = x <= k - 1 ? tail[static_cast<std::size_t>(std::max(2, x))] : 0.0;
    const double suf =
        N - x + 1 <= k - 1 ? tail[static_cast<std::size_t>(std::max(2, N - x + 1))] : 0.0;
    const double total = nb + pre + suf;
    if (total <= 0.0) return {horizon, false};  // frozen position
    t += rng.exponential(total * scale);
    if (t > horizon) return {horizon, false};
    double u = rng.uniform() * total;
    if (u < nb) {
      const int i = bulk_lo + static_cast<int>(u);
      x = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
    } else if (u < nb + pre) {
      u -= nb;
      int i = std::max(2, x);
      while (i < k - 1 &&
             u >= tail[static_cast<std::size_t>(i)] - tail[static_cast<std::size_t>(i + 1)]) {
        u -= tail[static_cast<std::size_t>(i)] - tail[static_cast<std::size_t>(i + 1)];
        ++i;
      }
      x = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(i)));
    } else {
      u -= nb + pre;
      int i = std::max(2, N - x + 1);
      while (i < k - 1 &&
             u >= tail[static_cast<std::size_t>(i)] - tail[static_cast<std::size_t>(i + 1)]) {
        u -= tail[static_cast<std::size_t>(i)] - tail[static_cast<std::size_t>(i + 1)];
        ++i;
      }
      x = N - i + 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(i)));
    }
  }
}

}  // namespace bshuf
