#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "blockshuffle/censoring.hpp"
#include "blockshuffle/dynamics.hpp"
#include "blockshuffle/rates.hpp"
#include "blockshuffle/stats.hpp"

namespace bshuf {

// Second-moment mixing-time lower bound from an approximate eigenfunction:
// t_mix(1-eps) >= (1/lambda) log(psi_max) - (1/(2 lambda)) log(4 max(2R,c)/eps).
struct LowerBoundInputs {
  double lambda = 0.0;   // approximate eigenvalue, > 0
  double c = 0.0;        // drift error bound, >= 0
  double R = 0.0;        // variance bound, > 0
  double psi_max = 0.0;  // sup-norm of the statistic, > 0
  double eps = 0.0;      // in (0,1)
};
double second_moment_lower_bound(const LowerBoundInputs& in);

// Replica farms below use the fast endpoint path (Poisson event counts, no
// event times) and the convention Phi_N = Phi^(1)_{N, floor(N/2)}. Replica r
// draws from the stream derive_seed(master_seed, tag, N, k, r), so every
// estimate is a deterministic function of (config, master seed), independent
// of the thread count.

// Phi_N at each time of the ascending grid, one trajectory per replica,
// started from the identity. Result: per grid time, a vector of replica values.
std::vector<std::vector<double>> sample_phi_grid(const ShuffleSpec& spec,
                                                 const std::vector<double>& ts,
                                                 int replicas,
                                                 std::uint64_t master_seed);

// Phi_N under exactly uniform states.
std::vector<double> sample_phi_stationary(int N, int replicas,
                                          std::uint64_t master_seed);

struct VarianceReport {
  double var = 0.0;
  double se = 0.0;     // jackknife SE of the variance
  double ci_hi = 0.0;  // var + 3 se
  double bound = 0.0;  // N^3
  bool within = false;
  int replicas = 0;
};
VarianceReport phi_variance_estimate(const ShuffleSpec& spec, double t,
                                     int replicas, std::uint64_t master_seed,
                                     bool stationary_start = false);

struct SubsetExcess {
  std::vector<int> subset;  // 1-based positions
  double e_prod = 0.0;      // E[prod X_i]
  double prod_e = 0.0;      // prod E[X_i]
  double excess = 0.0;      // e_prod - prod_e
  double se = 0.0;          // 0 in exact mode
};
struct NegDepReport {
  bool ok = false;
  long long n_checked = 0;
  double max_excess = -1.0;  // max over subsets of excess (exact) or z (mc)
  std::vector<SubsetExcess> violations;
};

// Exact mode: evolves the exclusion distribution from the projection of the
// identity and checks every pair.
NegDepReport negative_dependence_exact(const ShuffleSpec& spec, int K, double t,
                                       double slack = 1e-12,
                                       long long cap = 500000);

// Monte Carlo mode: full-chain replicas, all pairs and triples, flagging
// excesses beyond z_threshold standard errors (jackknife).
NegDepReport negative_dependence_mc(const ShuffleSpec& spec, int K, double t,
                                    int replicas, std::uint64_t master_seed,
                                    double z_threshold = 3.0);

struct DominanceRow {
  std::string statistic;
  double mean_diff = 0.0;  // E[f(censored)] - E[f(uncensored)], paired
  double se = 0.0;
};
struct DominanceReport {
  std::vector<DominanceRow> rows;
  bool ok = false;  // every statistic >= -3 se
};

// Shared-clock paired runs from the identity: both runs see one
// (time, interval) stream; block permutations are drawn per run unless
// share_blocks (in which case an empty schedule gives identical runs).
DominanceReport censoring_dominance_check(const ShuffleSpec& spec,
                                          const CensoringSchedule& schedule,
                                          double t, int replicas,
                                          std::uint64_t master_seed,
                                          int skeleton_K = 3,
                                          bool share_blocks = false);

// TV between the binned laws of a statistic under the dynamics and under
// stationarity; a statistical lower bound on the chain's TV distance.
TvEstimate statistic_tv_lower(const std::vector<double>& samples_dyn,
                              const std::vector<double>& samples_stat,
                              std::uint64_t boot_seed, int min_bins = 16);

// Grand-coupling coalescence times tau = max_i tau_i, one per replica. The
// first copy starts from the identity (or the reversal when adversarial);
// the second from a fresh uniform state. Unfinished replicas yield +infinity
// in memory and are counted in n_capped.
struct CouplingTaus {
  std::vector<double> taus;
  int n_capped = 0;
};
CouplingTaus coupling_taus(const ShuffleSpec& spec, int replicas,
                           double horizon, std::uint64_t master_seed,
                           bool adversarial_start = false);

// P(tau > t) with a Wilson interval at z standard errors: an upper estimate
// of the TV distance from stationarity at time t.
TvEstimate coupling_tv_upper(const CouplingTaus& taus, double t,
                             double z = 3.0);

// First times the card starting at position 1 exceeds the threshold.
struct ExitSamples {
  std::vector<double> taus;  // +infinity when not exited by the horizon
  int n_capped = 0;
};
ExitSamples boundary_exit_samples(const ShuffleSpec& spec, int threshold,
                                  int replicas, double horizon,
                                  std::uint64_t master_seed);

// Monte Carlo companion to the height-decay bound: mean height curves at the
// grid times and the fitted exponential rate of the mid profile.
struct DecayReport {
  std::vector<double> ts;
  std::vector<double> max_mean_h;  // max over x of mean h_t(x,y)
  std::vector<double> mid_mean_h;  // mean h_t(floor(N/2), y)
  double fitted_rate = 0.0;
  double lambda_ref = 0.0;
  int replicas = 0;
};
DecayReport height_decay_estimate(const ShuffleSpec& spec, int y,
                                  const std::vector<double>& ts, int replicas,
                                  std::uint64_t master_seed);

}  // namespace bshuf
