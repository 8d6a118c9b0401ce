#include "blockshuffle/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bshuf {

double pairwise_sum(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty sample");
  return pairwise_sum(xs) / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  const double m = mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return acc / static_cast<double>(n - 1);
}

double jackknife_se_of_variance(std::span<const double> xs) {
  const auto n = static_cast<double>(xs.size());
  if (xs.size() < 3) return 0.0;
  double sum = 0.0, sumsq = 0.0;
  for (double x : xs) {
    sum += x;
    sumsq += x * x;
  }
  // Leave-one-out variances from running sums.
  std::vector<double> loo(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double s = sum - xs[i];
    const double s2 = sumsq - xs[i] * xs[i];
    const double m = s / (n - 1.0);
    loo[i] = (s2 - (n - 1.0) * m * m) / (n - 2.0);
  }
  const double lm = mean(loo);
  double acc = 0.0;
  for (double v : loo) acc += (v - lm) * (v - lm);
  return std::sqrt((n - 1.0) / n * acc);
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile: empty sample");
  if (q <= 0.0) return sorted.front();
  if (q >= 1.0) return sorted.back();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  if (i + 1 >= sorted.size()) return sorted.back();
  return sorted[i] * (1.0 - frac) + sorted[i + 1] * frac;
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  return quantile_sorted(xs, 0.5);
}

std::pair<double, double> wilson_interval(long long successes, long long n,
                                          double z) {
  if (n <= 0) throw std::invalid_argument("wilson_interval: n <= 0");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

std::pair<double, double> fit_line(std::span<const double> xs,
                                   std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("fit_line: need >= 2 paired points");
  const double mx = mean(xs);
  const double my = mean(ys);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

double chi_square(std::span<const long long> counts,
                  std::span<const double> expected_prob) {
  if (counts.size() != expected_prob.size())
    throw std::invalid_argument("chi_square: size mismatch");
  long long n = 0;
  for (long long c : counts) n += c;
  double stat = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double e = expected_prob[i] * static_cast<double>(n);
    const double d = static_cast<double>(counts[i]) - e;
    stat += d * d / e;
  }
  return stat;
}

int fd_bin_count(std::vector<double> pooled, int min_bins) {
  std::sort(pooled.begin(), pooled.end());
  const double lo = pooled.front();
  const double hi = pooled.back();
  if (hi <= lo) return min_bins;
  const double iqr =
      quantile_sorted(pooled, 0.75) - quantile_sorted(pooled, 0.25);
  const double width =
      2.0 * iqr / std::cbrt(static_cast<double>(pooled.size()));
  if (width <= 0.0) return min_bins;
  const int bins = static_cast<int>(std::ceil((hi - lo) / width));
  return std::max(min_bins, bins);
}

namespace {

void histogram(std::span<const double> xs, double lo, double inv_width,
               int bins, std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(bins), 0.0);
  const double w = 1.0 / static_cast<double>(xs.size());
  for (double x : xs) {
    int b = static_cast<int>((x - lo) * inv_width);
    b = std::clamp(b, 0, bins - 1);
    out[static_cast<std::size_t>(b)] += w;
  }
}

double tv_of_histograms(const std::vector<double>& p,
                        const std::vector<double>& q) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::fabs(p[i] - q[i]);
  return 0.5 * acc;
}

}  // namespace

double binned_tv(std::span<const double> a, std::span<const double> b,
                 int bins) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("binned_tv: empty sample");
  double lo = a[0], hi = a[0];
  for (double x : a) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  for (double x : b) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (hi <= lo) return 0.0;  // both laws degenerate at the same point
  const double inv_width = static_cast<double>(bins) / (hi - lo);
  std::vector<double> pa, pb;
  histogram(a, lo, inv_width, bins, pa);
  histogram(b, lo, inv_width, bins, pb);
  return tv_of_histograms(pa, pb);
}

TvEstimate binned_tv_bootstrap(std::span<const double> a,
                               std::span<const double> b, int min_bins,
                               std::uint64_t boot_seed, int B) {
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const int bins = fd_bin_count(pooled, min_bins);

  TvEstimate est;
  est.point = binned_tv(a, b, bins);

  Rng rng(boot_seed);
  std::vector<double> ra(a.size()), rb(b.size()), tvs;
  tvs.reserve(static_cast<std::size_t>(B));
  for (int rep = 0; rep < B; ++rep) {
    for (auto& x : ra) x = a[rng.below(a.size())];
    for (auto& x : rb) x = b[rng.below(b.size())];
    tvs.push_back(binned_tv(ra, rb, bins));
  }
  std::sort(tvs.begin(), tvs.end());
  est.lo = quantile_sorted(tvs, 0.0015);
  est.hi = quantile_sorted(tvs, 0.9985);
  return est;
}

SlopeCI bootstrap_median_slope(const std::vector<double>& log_ns,
                               const std::vector<std::vector<double>>& samples,
                               std::uint64_t seed, int B) {
  if (log_ns.size() != samples.size() || log_ns.size() < 2)
    throw std::invalid_argument("bootstrap_median_slope: bad input");
  std::vector<double> meds(log_ns.size());
  for (std::size_t i = 0; i < samples.size(); ++i) meds[i] = median(samples[i]);
  std::vector<double> logmeds(meds.size());
  for (std::size_t i = 0; i < meds.size(); ++i) logmeds[i] = std::log(meds[i]);

  SlopeCI out;
  out.slope = fit_line(log_ns, logmeds).first;

  Rng rng(seed);
  std::vector<double> slopes;
  slopes.reserve(static_cast<std::size_t>(B));
  std::vector<double> resampled;
  for (int rep = 0; rep < B; ++rep) {
    std::vector<double> lm(log_ns.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& s = samples[i];
      resampled.resize(s.size());
      for (auto& x : resampled) x = s[rng.below(s.size())];
      lm[i] = std::log(median(resampled));
    }
    slopes.push_back(fit_line(log_ns, lm).first);
  }
  std::sort(slopes.begin(), slopes.end());
  out.lo = quantile_sorted(slopes, 0.0015);
  out.hi = quantile_sorted(slopes, 0.9985);
  return out;
}

}  // namespace bshuf
