#include "blockshuffle/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "blockshuffle/distribution.hpp"
#include "blockshuffle/parallel.hpp"
#include "blockshuffle/spectral.hpp"

namespace bshuf {

double second_moment_lower_bound(const LowerBoundInputs& in) {
  if (in.lambda <= 0.0 || in.psi_max <= 0.0)
    throw std::invalid_argument("second_moment_lower_bound: lambda, psi_max > 0");
  if (in.R <= 0.0 || in.c < 0.0)
    throw std::invalid_argument("second_moment_lower_bound: R > 0, c >= 0");
  if (in.eps <= 0.0 || in.eps >= 1.0)
    throw std::invalid_argument("second_moment_lower_bound: eps in (0,1)");
  return std::log(in.psi_max) / in.lambda -
         std::log(4.0 * std::max(2.0 * in.R, in.c) / in.eps) / (2.0 * in.lambda);
}

namespace {

double phi_of_labels(const std::vector<std::int32_t>& labels, int j, int y) {
  const auto n = static_cast<int>(labels.size());
  std::vector<double> terms(static_cast<std::size_t>(n - 1));
  long long count = 0;
  for (int x = 1; x <= n - 1; ++x) {
    count += labels[static_cast<std::size_t>(x - 1)] <= y;
    const double h =
        static_cast<double>(count * n - static_cast<long long>(x) * y) / n;
    terms[static_cast<std::size_t>(x - 1)] = h * psi(n, j, x);
  }
  return pairwise_sum(terms);
}

std::vector<std::int32_t> identity_labels(int n) {
  std::vector<std::int32_t> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 1);
  return v;
}

}  // namespace

std::vector<std::vector<double>> sample_phi_grid(const ShuffleSpec& spec,
                                                 const std::vector<double>& ts,
                                                 int replicas,
                                                 std::uint64_t master_seed) {
  const RateTable table = make_rate_table(spec);
  const int y = spec.N / 2;
  std::vector<std::vector<double>> out(
      ts.size(), std::vector<double>(static_cast<std::size_t>(replicas)));
  parallel_for(replicas, [&](std::int64_t r) {
    Rng rng(derive_seed(master_seed, "phi-grid", spec.N, spec.k,
                        static_cast<std::uint64_t>(r)));
    auto labels = identity_labels(spec.N);
    double t_prev = 0.0;
    for (std::size_t ti = 0; ti < ts.size(); ++ti) {
      const long long n_updates =
          rng.poisson(table.total_rate * (ts[ti] - t_prev));
      apply_uniform_updates(labels, n_updates, table, rng);
      out[ti][static_cast<std::size_t>(r)] = phi_of_labels(labels, 1, y);
      t_prev = ts[ti];
    }
  });
  return out;
}

std::vector<double> sample_phi_stationary(int N, int replicas,
                                          std::uint64_t master_seed) {
  std::vector<double> out(static_cast<std::size_t>(replicas));
  parallel_for(replicas, [&](std::int64_t r) {
    Rng rng(derive_seed(master_seed, "phi-stationary", N, 0,
                        static_cast<std::uint64_t>(r)));
    const Permutation p = uniform_perm(rng, N);
    out[static_cast<std::size_t>(r)] = phi(p, 1, N / 2);
  });
  return out;
}

VarianceReport phi_variance_estimate(const ShuffleSpec& spec, double t,
                                     int replicas, std::uint64_t master_seed,
                                     bool stationary_start) {
  if (replicas < 100)
    throw std::invalid_argument("phi_variance_estimate: replicas >= 100");
  std::vector<double> samples;
  if (stationary_start) {
    samples = sample_phi_stationary(spec.N, replicas, master_seed);
  } else {
    samples = sample_phi_grid(spec, {t}, replicas, master_seed).front();
  }
  VarianceReport rep;
  rep.replicas = replicas;
  rep.var = variance(samples);
  rep.se = jackknife_se_of_variance(samples);
  rep.ci_hi = rep.var + 3.0 * rep.se;
  rep.bound = static_cast<double>(spec.N) * spec.N * spec.N;
  rep.within = rep.ci_hi <= rep.bound;
  return rep;
}

NegDepReport negative_dependence_exact(const ShuffleSpec& spec, int K, double t,
                                       double slack, long long cap) {
  const SparseGenerator gen = build_exclusion_generator(spec, K, cap);
  const SubsetSpace space(spec.N, K);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(spec.N), 0);
  std::fill(bits.begin(), bits.begin() + K, 1);
  const Dist mu = evolve(gen, point_mass(gen.n_states, space.encode(bits)), t);

  const int N = spec.N;
  std::vector<double> e1(static_cast<std::size_t>(N), 0.0);
  std::vector<double> e2(static_cast<std::size_t>(N) * N, 0.0);
  std::vector<std::uint8_t> b;
  for (long long s = 0; s < gen.n_states; ++s) {
    const double p = mu[static_cast<std::size_t>(s)];
    if (p == 0.0) continue;
    space.decode(s, b);
    for (int i = 0; i < N; ++i) {
      if (!b[static_cast<std::size_t>(i)]) continue;
      e1[static_cast<std::size_t>(i)] += p;
      for (int j = i + 1; j < N; ++j) {
        if (b[static_cast<std::size_t>(j)])
          e2[static_cast<std::size_t>(i) * N + j] += p;
      }
    }
  }

  NegDepReport rep;
  rep.ok = true;
  for (int i = 0; i < N; ++i) {
    for (int j = i + 1; j < N; ++j) {
      const double exy = e2[static_cast<std::size_t>(i) * N + j];
      const double exey = e1[static_cast<std::size_t>(i)] * e1[static_cast<std::size_t>(j)];
      const double excess = exy - exey;
      ++rep.n_checked;
      rep.max_excess = std::max(rep.max_excess, excess);
      if (excess > slack) {
        rep.ok = false;
        rep.violations.push_back({{i + 1, j + 1}, exy, exey, excess, 0.0});
      }
    }
  }
  return rep;
}

namespace {

// Jackknife SE of D = mean(prod X) - prod(mean X_i) from joint pattern counts.
double jackknife_se_from_cells(const std::vector<long long>& cell_counts,
                               const std::vector<std::vector<int>>& cell_bits,
                               long long n) {
  const int order = static_cast<int>(cell_bits.front().size());
  const double nm1 = static_cast<double>(n - 1);
  // Marginal one-counts and the all-ones count.
  std::vector<long long> ci(static_cast<std::size_t>(order), 0);
  long long cs = 0;
  for (std::size_t c = 0; c < cell_counts.size(); ++c) {
    bool all = true;
    for (int d = 0; d < order; ++d) {
      if (cell_bits[c][static_cast<std::size_t>(d)])
        ci[static_cast<std::size_t>(d)] += cell_counts[c];
      else
        all = false;
    }
    if (all) cs += cell_counts[c];
  }
  // Leave-one-out D for each pattern.
  std::vector<double> dloo(cell_counts.size());
  double dbar = 0.0;
  for (std::size_t c = 0; c < cell_counts.size(); ++c) {
    const bool all = std::all_of(cell_bits[c].begin(), cell_bits[c].end(),
                                 [](int v) { return v != 0; });
    double prod = 1.0;
    for (int d = 0; d < order; ++d) {
      prod *= (static_cast<double>(ci[static_cast<std::size_t>(d)]) -
               cell_bits[c][static_cast<std::size_t>(d)]) /
              nm1;
    }
    dloo[c] = (static_cast<double>(cs) - (all ? 1.0 : 0.0)) / nm1 - prod;
    dbar += dloo[c] * static_cast<double>(cell_counts[c]);
  }
  dbar /= static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t c = 0; c < cell_counts.size(); ++c) {
    acc += static_cast<double>(cell_counts[c]) * (dloo[c] - dbar) * (dloo[c] - dbar);
  }
  return std::sqrt(nm1 / static_cast<double>(n) * acc);
}

}  // namespace

NegDepReport negative_dependence_mc(const ShuffleSpec& spec, int K, double t,
                                    int replicas, std::uint64_t master_seed,
                                    double z_threshold) {
  const int N = spec.N;
  if (N > 64) throw std::invalid_argument("negative_dependence_mc: N <= 64");
  const RateTable table = make_rate_table(spec);

  // Occupancy masks per replica.
  std::vector<std::uint64_t> masks(static_cast<std::size_t>(replicas));
  parallel_for(replicas, [&](std::int64_t r) {
    Rng rng(derive_seed(master_seed, "negdep-mc", spec.N, spec.k,
                        static_cast<std::uint64_t>(r)));
    auto labels = identity_labels(N);
    apply_uniform_updates(labels, rng.poisson(table.total_rate * t), table, rng);
    std::uint64_t m = 0;
    for (int x = 0; x < N; ++x) {
      if (labels[static_cast<std::size_t>(x)] <= K) m |= 1ULL << x;
    }
    masks[static_cast<std::size_t>(r)] = m;
  });

  // Joint counts.
  std::vector<long long> c1(static_cast<std::size_t>(N), 0);
  std::vector<long long> c2(static_cast<std::size_t>(N) * N, 0);
  std::vector<long long> c3;
  std::vector<int> ones;
  const long long n3 = static_cast<long long>(N) * N * N;
  c3.assign(static_cast<std::size_t>(n3), 0);
  for (std::uint64_t m : masks) {
    ones.clear();
    for (int x = 0; x < N; ++x)
      if (m >> x & 1ULL) ones.push_back(x);
    for (std::size_t a = 0; a < ones.size(); ++a) {
      ++c1[static_cast<std::size_t>(ones[a])];
      for (std::size_t b = a + 1; b < ones.size(); ++b) {
        ++c2[static_cast<std::size_t>(ones[a]) * N + ones[b]];
        for (std::size_t c = b + 1; c < ones.size(); ++c) {
          c3[(static_cast<std::size_t>(ones[a]) * N + ones[b]) * N + ones[c]]++;
        }
      }
    }
  }

  const long long n = replicas;
  NegDepReport rep;
  rep.ok = true;
  const auto check = [&](const std::vector<int>& idx, long long count_all,
                         const std::vector<long long>& cells,
                         const std::vector<std::vector<int>>& cell_bits) {
    const int order = static_cast<int>(idx.size());
    double prod = 1.0;
    for (int d = 0; d < order; ++d)
      prod *= static_cast<double>(c1[static_cast<std::size_t>(idx[static_cast<std::size_t>(d)])]) / n;
    const double eprod = static_cast<double>(count_all) / n;
    const double excess = eprod - prod;
    const double se = jackknife_se_from_cells(cells, cell_bits, n);
    const double z = se > 0.0 ? excess / se : (excess > 0.0 ? 1e9 : 0.0);
    ++rep.n_checked;
    rep.max_excess = std::max(rep.max_excess, z);
    if (excess > 0.0 && z > z_threshold) {
      rep.ok = false;
      SubsetExcess v;
      for (int d : idx) v.subset.push_back(d + 1);
      v.e_prod = eprod;
      v.prod_e = prod;
      v.excess = excess;
      v.se = se;
      rep.violations.push_back(v);
    }
  };

  for (int i = 0; i < N; ++i) {
    for (int j = i + 1; j < N; ++j) {
      const long long nij = c2[static_cast<std::size_t>(i) * N + j];
      const long long ni = c1[static_cast<std::size_t>(i)];
      const long long nj = c1[static_cast<std::size_t>(j)];
      // Cells (bi,bj): 11, 10, 01, 00.
      std::vector<long long> cells = {nij, ni - nij, nj - nij,
                                      n - ni - nj + nij};
      std::vector<std::vector<int>> bits = {{1, 1}, {1, 0}, {0, 1}, {0, 0}};
      check({i, j}, nij, cells, bits);
    }
  }
  for (int i = 0; i < N; ++i) {
    for (int j = i + 1; j < N; ++j) {
      for (int l = j + 1; l < N; ++l) {
        const long long nijl = c3[(static_cast<std::size_t>(i) * N + j) * N + l];
        const long long nij = c2[static_cast<std::size_t>(i) * N + j];
        const long long nil = c2[static_cast<std::size_t>(i) * N + l];
        const long long njl = c2[static_cast<std::size_t>(j) * N + l];
        const long long ni = c1[static_cast<std::size_t>(i)];
        const long long nj = c1[static_cast<std::size_t>(j)];
        const long long nl = c1[static_cast<std::size_t>(l)];
        // Inclusion-exclusion for the 8 joint cells.
        std::vector<long long> cells = {
            nijl,
            nij - nijl,
            nil - nijl,
            njl - nijl,
            ni - nij - nil + nijl,
            nj - nij - njl + nijl,
            nl - nil - njl + nijl,
            n - ni - nj - nl + nij + nil + njl - nijl};
        std::vector<std::vector<int>> bits = {{1, 1, 1}, {1, 1, 0}, {1, 0, 1},
                                              {0, 1, 1}, {1, 0, 0}, {0, 1, 0},
                                              {0, 0, 1}, {0, 0, 0}};
        check({i, j, l}, nijl, cells, bits);
      }
    }
  }
  return rep;
}

DominanceReport censoring_dominance_check(const ShuffleSpec& spec,
                                          const CensoringSchedule& schedule,
                                          double t, int replicas,
                                          std::uint64_t master_seed,
                                          int skeleton_K, bool share_blocks) {
  const RateTable table = make_rate_table(spec);
  const Permutation id = Permutation::identity(spec.N);
  const int y = spec.N / 2;

  const int n_stats = 3;
  std::vector<std::vector<double>> diffs(
      n_stats, std::vector<double>(static_cast<std::size_t>(replicas)));
  parallel_for(replicas, [&](std::int64_t r) {
    Rng seeder(derive_seed(master_seed, "censor-dom", spec.N, spec.k,
                           static_cast<std::uint64_t>(r)));
    Rng clock(seeder.next());
    Rng blocks_a(seeder.next());
    Rng blocks_b(seeder.next());
    auto [censored, uncensored] = simulate_paired(
        id, t, table, &schedule, nullptr, clock, blocks_a, blocks_b,
        share_blocks);
    const auto stat = [&](const Permutation& p, int which) {
      switch (which) {
        case 0:
          return phi(p, 1, y);
        case 1:
          return height(p, y, y);
        default: {
          const SkeletonData sk = skeleton(p, skeleton_K);
          long long acc = 0;
          for (long long v : sk.num) acc += v;
          return static_cast<double>(acc) / sk.denom;
        }
      }
    };
    for (int s = 0; s < n_stats; ++s) {
      diffs[static_cast<std::size_t>(s)][static_cast<std::size_t>(r)] =
          stat(censored, s) - stat(uncensored, s);
    }
  });

  DominanceReport rep;
  rep.ok = true;
  const char* names[] = {"phi", "height_mid", "skeleton_sum"};
  for (int s = 0; s < n_stats; ++s) {
    const auto& d = diffs[static_cast<std::size_t>(s)];
    DominanceRow row;
    row.statistic = names[s];
    row.mean_diff = mean(d);
    row.se = std::sqrt(variance(d) / static_cast<double>(replicas));
    rep.ok = rep.ok && row.mean_diff >= -3.0 * row.se;
    rep.rows.push_back(row);
  }
  return rep;
}

TvEstimate statistic_tv_lower(const std::vector<double>& samples_dyn,
                              const std::vector<double>& samples_stat,
                              std::uint64_t boot_seed, int min_bins) {
  if (samples_dyn.empty() || samples_stat.empty())
    throw std::invalid_argument("statistic_tv_lower: empty sample");
  return binned_tv_bootstrap(samples_dyn, samples_stat, min_bins, boot_seed);
}

CouplingTaus coupling_taus(const ShuffleSpec& spec, int replicas,
                           double horizon, std::uint64_t master_seed,
                           bool adversarial_start) {
  const RateTable table = make_rate_table(spec);
  CouplingTaus out;
  out.taus.assign(static_cast<std::size_t>(replicas), 0.0);
  std::vector<std::uint8_t> capped(static_cast<std::size_t>(replicas), 0);
  Permutation first = Permutation::identity(spec.N);
  if (adversarial_start) {
    std::vector<std::int32_t> rev(static_cast<std::size_t>(spec.N));
    for (int i = 0; i < spec.N; ++i)
      rev[static_cast<std::size_t>(i)] = spec.N - i;
    first = Permutation(std::move(rev));
  }
  parallel_for(replicas, [&](std::int64_t r) {
    Rng rng(derive_seed(master_seed, "coupling", spec.N, spec.k,
                        static_cast<std::uint64_t>(r)));
    const Permutation second = uniform_perm(rng, spec.N);
    const CoalescenceResult res =
        coalescence_times(first, second, table, rng, horizon);
    out.taus[static_cast<std::size_t>(r)] =
        res.coalesced ? res.tau_all : std::numeric_limits<double>::infinity();
    capped[static_cast<std::size_t>(r)] = res.coalesced ? 0 : 1;
  });
  for (auto c : capped) out.n_capped += c;
  return out;
}

TvEstimate coupling_tv_upper(const CouplingTaus& taus, double t, double z) {
  long long over = 0;
  for (double tau : taus.taus) over += tau > t;
  TvEstimate est;
  const auto n = static_cast<long long>(taus.taus.size());
  est.point = static_cast<double>(over) / static_cast<double>(n);
  std::tie(est.lo, est.hi) = wilson_interval(over, n, z);
  return est;
}

ExitSamples boundary_exit_samples(const ShuffleSpec& spec, int threshold,
                                  int replicas, double horizon,
                                  std::uint64_t master_seed) {
  if (threshold >= spec.N)
    throw std::invalid_argument("boundary_exit_samples: threshold < N");
  const RateTable table = make_rate_table(spec);
  ExitSamples out;
  out.taus.assign(static_cast<std::size_t>(replicas), 0.0);
  std::vector<std::uint8_t> capped(static_cast<std::size_t>(replicas), 0);
  parallel_for(replicas, [&](std::int64_t r) {
    Rng rng(derive_seed(master_seed, "boundary-exit", spec.N, spec.k,
                        static_cast<std::uint64_t>(r)));
    const ExitTime e = single_card_exit_time(table, 1, threshold, horizon, rng);
    out.taus[static_cast<std::size_t>(r)] =
        e.exited ? e.t : std::numeric_limits<double>::infinity();
    capped[static_cast<std::size_t>(r)] = e.exited ? 0 : 1;
  });
  for (auto c : capped) out.n_capped += c;
  return out;
}

DecayReport height_decay_estimate(const ShuffleSpec& spec, int y,
                                  const std::vector<double>& ts, int replicas,
                                  std::uint64_t master_seed) {
  const RateTable table = make_rate_table(spec);
  const int N = spec.N;
  const auto n_ts = ts.size();
  // Per-replica height curves, reduced serially for determinism.
  std::vector<std::vector<double>> curves(
      static_cast<std::size_t>(replicas),
      std::vector<double>(n_ts * static_cast<std::size_t>(N + 1), 0.0));
  parallel_for(replicas, [&](std::int64_t r) {
    Rng rng(derive_seed(master_seed, "decay", spec.N, spec.k,
                        static_cast<std::uint64_t>(r)));
    auto labels = identity_labels(N);
    double t_prev = 0.0;
    auto& row = curves[static_cast<std::size_t>(r)];
    for (std::size_t ti = 0; ti < n_ts; ++ti) {
      apply_uniform_updates(labels,
                            rng.poisson(table.total_rate * (ts[ti] - t_prev)),
                            table, rng);
      long long count = 0;
      for (int x = 1; x <= N; ++x) {
        count += labels[static_cast<std::size_t>(x - 1)] <= y;
        row[ti * static_cast<std::size_t>(N + 1) + static_cast<std::size_t>(x)] =
            static_cast<double>(count * N - static_cast<long long>(x) * y) / N;
      }
      t_prev = ts[ti];
    }
  });

  DecayReport rep;
  rep.ts = ts;
  rep.replicas = replicas;
  rep.lambda_ref = lambda_approx(N, spec.k, 1);
  rep.max_mean_h.assign(n_ts, 0.0);
  rep.mid_mean_h.assign(n_ts, 0.0);
  std::vector<double> acc(static_cast<std::size_t>(N + 1));
  for (std::size_t ti = 0; ti < n_ts; ++ti) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (const auto& row : curves) {
      for (int x = 0; x <= N; ++x)
        acc[static_cast<std::size_t>(x)] +=
            row[ti * static_cast<std::size_t>(N + 1) + static_cast<std::size_t>(x)];
    }
    double mx = -1e300;
    for (double& v : acc) {
      v /= replicas;
      mx = std::max(mx, v);
    }
    rep.max_mean_h[ti] = mx;
    rep.mid_mean_h[ti] = acc[static_cast<std::size_t>(N / 2)];
  }

  // Exponential rate of the mid-profile means over grid points with a usable
  // positive signal.
  std::vector<double> fx, fy;
  for (std::size_t ti = 0; ti < n_ts; ++ti) {
    if (rep.mid_mean_h[ti] > 0.0) {
      fx.push_back(ts[ti]);
      fy.push_back(std::log(rep.mid_mean_h[ti]));
    }
  }
  rep.fitted_rate = fx.size() >= 2 ? -fit_line(fx, fy).first : 0.0;
  return rep;
}

}  // namespace bshuf
