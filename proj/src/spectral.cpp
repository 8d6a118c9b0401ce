#include "blockshuffle/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "blockshuffle/stats.hpp"

namespace bshuf {

double psi(int N, int j, int x) {
  const long long m = static_cast<long long>(x) * j;
  if (m % N == 0) return 0.0;
  return std::sin(static_cast<double>(m) * std::numbers::pi / N);
}

std::vector<double> psi_table(int N, int j) {
  std::vector<double> t(static_cast<std::size_t>(N + 1));
  for (int x = 0; x <= N; ++x) t[static_cast<std::size_t>(x)] = psi(N, j, x);
  return t;
}

double lambda_approx(int N, int k, int j) {
  if (j < 1 || j > N) throw std::out_of_range("lambda_approx: j in [1,N]");
  if (k < 2 || k > N) throw std::out_of_range("lambda_approx: k in [2,N]");
  std::vector<double> terms(static_cast<std::size_t>(k));
  for (int i = 1; i <= k; ++i) {
    terms[static_cast<std::size_t>(i - 1)] =
        (static_cast<double>(k - i) / k) *
        std::cos(static_cast<double>(i) * j * std::numbers::pi / N);
  }
  return (k - 1) - 2.0 * pairwise_sum(terms);
}

double lambda_leading(int N, int k, int j) {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return static_cast<double>(k) * j * j * pi2 *
         (static_cast<double>(k) * k - 1.0) / (12.0 * static_cast<double>(N) * N);
}

double phi(const Permutation& p, int j, int y) {
  return phi_from_curve(height_curve_num(p, y), p.n(), j);
}

double phi_from_curve(std::span<const long long> hnum, int N, int j) {
  std::vector<double> terms(static_cast<std::size_t>(N - 1));
  for (int x = 1; x < N; ++x) {
    terms[static_cast<std::size_t>(x - 1)] =
        static_cast<double>(hnum[static_cast<std::size_t>(x)]) / N *
        psi(N, j, x);
  }
  return pairwise_sum(terms);
}

double interpolate_height(std::span<const double> curve, int a, int b, int x) {
  if (a == b) return curve[static_cast<std::size_t>(x)];
  const double ha = curve[static_cast<std::size_t>(a)];
  const double hb = curve[static_cast<std::size_t>(b)];
  return (static_cast<double>(b - x) * ha + static_cast<double>(x - a) * hb) /
         static_cast<double>(b - a);
}

double generator_apply_phi(const Permutation& p, const RateTable& table, int j,
                           int y) {
  const int N = p.n();
  const auto hnum = height_curve_num(p, y);
  std::vector<double> curve(hnum.size());
  for (std::size_t i = 0; i < hnum.size(); ++i)
    curve[i] = static_cast<double>(hnum[i]) / N;

  std::vector<double> contributions;
  contributions.reserve(table.intervals.size());
  for (const Interval& iv : table.intervals) {
    // The update fixes h(lo-1) and h(hi); x in [lo, hi-1] moves to the
    // interpolated expectation.
    const int a = iv.lo - 1, b = iv.hi;
    std::vector<double> diff;
    diff.reserve(static_cast<std::size_t>(b - a));
    for (int x = iv.lo; x <= iv.hi - 1 && x <= N - 1; ++x) {
      diff.push_back((interpolate_height(curve, a, b, x) -
                      curve[static_cast<std::size_t>(x)]) *
                     psi(N, j, x));
    }
    contributions.push_back(iv.rate * pairwise_sum(diff));
  }
  return pairwise_sum(contributions);
}

double generator_apply_phi_enumerated(const Permutation& p,
                                      const RateTable& table, int j, int y) {
  const double phi_here = phi(p, j, y);
  double acc = 0.0;
  for (const Interval& iv : table.intervals) {
    const int len = iv.hi - iv.lo + 1;
    std::vector<int> order(static_cast<std::size_t>(len));
    for (int m = 0; m < len; ++m) order[static_cast<std::size_t>(m)] = m + 1;
    long long fact = 1;
    for (int m = 2; m <= len; ++m) fact *= m;
    double sum = 0.0;
    do {
      const Permutation block(
          std::vector<std::int32_t>(order.begin(), order.end()));
      sum += phi(apply_block(p, block, iv.lo, iv.hi), j, y) - phi_here;
    } while (std::next_permutation(order.begin(), order.end()));
    acc += iv.rate * sum / static_cast<double>(fact);
  }
  return acc;
}

double eigen_residual(const Permutation& p, const RateTable& table, int j,
                      int y) {
  const double lam = lambda_approx(p.n(), table.k, j);
  return std::fabs(-generator_apply_phi(p, table, j, y) -
                   lam * phi(p, j, y));
}

double interior_identity_residual(int N, int k, int j, int x) {
  if (x < k || x > N - k)
    throw std::out_of_range("interior_identity_residual: x in [k, N-k]");
  const double lam = lambda_approx(N, k, j);
  std::vector<double> terms(static_cast<std::size_t>(k - 1));
  for (int i = 1; i <= k - 1; ++i) {
    terms[static_cast<std::size_t>(i - 1)] =
        (static_cast<double>(k - i) / k) *
        (psi(N, j, x - i) + psi(N, j, x + i));
  }
  const double rhs = (k - 1) * psi(N, j, x) - pairwise_sum(terms);
  return std::fabs(lam * psi(N, j, x) - rhs);
}

Rat boundary_identity_residual(int k, int x) {
  if (k < 3) throw std::out_of_range("boundary_identity_residual: k >= 3");
  if (x < 1 || x > k - 1)
    throw std::out_of_range("boundary_identity_residual: x in [1,k-1]");
  Rat lhs(0);
  if (x >= 2) {
    long long sumsq = 0;
    for (long long i = 1; i <= x - 1; ++i) sumsq += i * i;
    lhs += boundary_rate(k, x) * Rat(sumsq, x);
  }
  Rat delta_tail(0);
  for (int i = x + 1; i <= k - 1; ++i) delta_tail += boundary_rate(k, i);
  lhs -= (Rat(x - k + 1) + delta_tail) * Rat(x);

  Rat rhs(0);
  for (long long i = 1; i <= k - 1; ++i)
    rhs += Rat(k - i, k) * Rat(x - i);
  return lhs - rhs;
}

double expected_height_decay_bound(int N, int k, int y, double t, double C) {
  const double m = std::min(y, N - y);
  return 8.0 * m * std::exp(-t * lambda_approx(N, k, 1)) +
         C * static_cast<double>(k) * k * k;
}

}  // namespace bshuf
