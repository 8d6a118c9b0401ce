#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "blockshuffle/rng.hpp"

namespace bshuf {

double pairwise_sum(std::span<const double> xs);

double mean(std::span<const double> xs);

// Unbiased sample variance (n-1 denominator).
double variance(std::span<const double> xs);

// Jackknife standard error of the sample variance.
double jackknife_se_of_variance(std::span<const double> xs);

// Quantile of a sorted sample, linear interpolation between order statistics.
double quantile_sorted(std::span<const double> sorted, double q);

double median(std::vector<double> xs);

// Wilson score interval for a binomial proportion at z standard errors.
std::pair<double, double> wilson_interval(long long successes, long long n,
                                          double z);

// Least-squares line fit; returns {slope, intercept}.
std::pair<double, double> fit_line(std::span<const double> xs,
                                   std::span<const double> ys);

// Pearson chi-square statistic against given expected probabilities.
double chi_square(std::span<const long long> counts,
                  std::span<const double> expected_prob);

// Number of histogram bins by the Freedman-Diaconis rule on the pooled
// sample, never fewer than min_bins.
int fd_bin_count(std::vector<double> pooled, int min_bins);

// Total variation distance between binned empirical laws of two samples on a
// shared equal-width grid spanning the pooled range.
double binned_tv(std::span<const double> a, std::span<const double> b,
                 int bins);

struct TvEstimate {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// binned_tv plus a bootstrap percentile interval (B resamples).
TvEstimate binned_tv_bootstrap(std::span<const double> a,
                               std::span<const double> b, int min_bins,
                               std::uint64_t boot_seed, int B = 200);

// Bootstrap slope CI of log(median(tau)) against log(N). Returns
// {slope, lo, hi} at roughly +-3 standard errors (0.1%/99.9% percentiles).
struct SlopeCI {
  double slope = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};
SlopeCI bootstrap_median_slope(const std::vector<double>& log_ns,
                               const std::vector<std::vector<double>>& samples,
                               std::uint64_t seed, int B = 400);

}  // namespace bshuf
