#include "blockshuffle/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "blockshuffle/parallel.hpp"
#include "blockshuffle/spectral.hpp"
#include "blockshuffle/stats.hpp"

namespace bshuf {

PermSpace::PermSpace(int n) : N(n) {
  n_states = 1;
  for (int i = 2; i <= n; ++i) n_states *= i;
}

void PermSpace::decode(long long idx, std::vector<std::int32_t>& labels) const {
  labels.resize(static_cast<std::size_t>(N));
  std::vector<std::int32_t> pool(static_cast<std::size_t>(N));
  std::iota(pool.begin(), pool.end(), 1);
  long long f = n_states;
  for (int i = 0; i < N; ++i) {
    f /= N - i;
    const auto d = static_cast<std::size_t>(idx / f);
    idx %= f;
    labels[static_cast<std::size_t>(i)] = pool[d];
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(d));
  }
}

long long PermSpace::encode(const std::vector<std::int32_t>& labels) const {
  long long idx = 0;
  long long f = n_states;
  std::vector<bool> used(static_cast<std::size_t>(N + 1), false);
  for (int i = 0; i < N; ++i) {
    f /= N - i;
    int smaller = 0;
    const std::int32_t l = labels[static_cast<std::size_t>(i)];
    for (std::int32_t v = 1; v < l; ++v) smaller += !used[static_cast<std::size_t>(v)];
    idx += smaller * f;
    used[static_cast<std::size_t>(l)] = true;
  }
  return idx;
}

SubsetSpace::SubsetSpace(int n, int k) : N(n), K(k) {
  choose_.assign(static_cast<std::size_t>(n + 1),
                 std::vector<long long>(static_cast<std::size_t>(n + 1), 0));
  for (int i = 0; i <= n; ++i) {
    choose_[static_cast<std::size_t>(i)][0] = 1;
    for (int j = 1; j <= i; ++j) {
      choose_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          choose_[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)] +
          choose_[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j)];
    }
  }
  n_states = choose_[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
}

void SubsetSpace::decode(long long idx, std::vector<std::uint8_t>& bits) const {
  bits.assign(static_cast<std::size_t>(N), 0);
  int remaining = K;
  for (int pos = 0; pos < N && remaining > 0; ++pos) {
    const long long with_one =
        choose_[static_cast<std::size_t>(N - pos - 1)]
               [static_cast<std::size_t>(remaining - 1)];
    if (idx < with_one) {
      bits[static_cast<std::size_t>(pos)] = 1;
      --remaining;
    } else {
      idx -= with_one;
    }
  }
}

long long SubsetSpace::encode(const std::vector<std::uint8_t>& bits) const {
  long long idx = 0;
  int remaining = K;
  for (int pos = 0; pos < N && remaining > 0; ++pos) {
    if (bits[static_cast<std::size_t>(pos)]) {
      --remaining;
    } else {
      idx += choose_[static_cast<std::size_t>(N - pos - 1)]
                    [static_cast<std::size_t>(remaining - 1)];
    }
  }
  return idx;
}

Rat SparseGenerator::rate_between(long long from, long long to) const {
  for (std::int64_t e = row_ptr[static_cast<std::size_t>(from)];
       e < row_ptr[static_cast<std::size_t>(from) + 1]; ++e) {
    if (col[static_cast<std::size_t>(e)] == to)
      return rate_exact[static_cast<std::size_t>(e)];
  }
  return Rat(0);
}

namespace {

long long factorial(int n) {
  long long f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

struct RowAccumulator {
  std::map<long long, Rat> entries;
  void add(long long target, const Rat& r) {
    auto [it, inserted] = entries.emplace(target, r);
    if (!inserted) it->second += r;
  }
};

void finalize(SparseGenerator& gen, std::vector<RowAccumulator>& rows,
              double rate_scale) {
  gen.row_ptr.assign(static_cast<std::size_t>(gen.n_states) + 1, 0);
  std::size_t nnz = 0;
  for (const auto& r : rows) nnz += r.entries.size();
  gen.col.reserve(nnz);
  gen.rate.reserve(nnz);
  gen.rate_exact.reserve(nnz);
  gen.exit_rate.assign(static_cast<std::size_t>(gen.n_states), 0.0);
  for (long long s = 0; s < gen.n_states; ++s) {
    double exit = 0.0;
    for (const auto& [target, r] : rows[static_cast<std::size_t>(s)].entries) {
      gen.col.push_back(static_cast<std::int32_t>(target));
      const double rd = r.to_double() * rate_scale;
      gen.rate.push_back(rd);
      gen.rate_exact.push_back(r);
      exit += rd;
    }
    gen.exit_rate[static_cast<std::size_t>(s)] = exit;
    gen.row_ptr[static_cast<std::size_t>(s) + 1] =
        static_cast<std::int64_t>(gen.col.size());
    rows[static_cast<std::size_t>(s)].entries.clear();
  }
  gen.theta = *std::max_element(gen.exit_rate.begin(), gen.exit_rate.end());
}

}  // namespace

SparseGenerator build_sparse_generator(const ShuffleSpec& spec, long long cap) {
  PermSpace space(spec.N);
  if (space.n_states > cap)
    throw std::invalid_argument("build_sparse_generator: state cap exceeded");
  const RateTable table = make_rate_table(spec);

  SparseGenerator gen;
  gen.n_states = space.n_states;
  std::vector<RowAccumulator> rows(static_cast<std::size_t>(space.n_states));

  std::vector<std::int32_t> labels, target;
  for (long long s = 0; s < space.n_states; ++s) {
    space.decode(s, labels);
    for (std::size_t ivx = 0; ivx < table.intervals.size(); ++ivx) {
      const Interval& iv = table.intervals[ivx];
      const int len = iv.hi - iv.lo + 1;
      const Rat per_perm = table.exact_rates[ivx] / Rat(factorial(len));
      std::vector<int> order(static_cast<std::size_t>(len));
      std::iota(order.begin(), order.end(), 0);
      target = labels;
      do {
        bool is_id = true;
        for (int m = 0; m < len; ++m) {
          target[static_cast<std::size_t>(iv.lo - 1 + m)] =
              labels[static_cast<std::size_t>(iv.lo - 1 +
                                              order[static_cast<std::size_t>(m)])];
          is_id &= order[static_cast<std::size_t>(m)] == m;
        }
        if (!is_id)
          rows[static_cast<std::size_t>(s)].add(space.encode(target), per_perm);
      } while (std::next_permutation(order.begin(), order.end()));
    }
  }
  finalize(gen, rows, spec.rate_scale);
  return gen;
}

SparseGenerator build_exclusion_generator(const ShuffleSpec& spec, int K,
                                          long long cap) {
  if (K < 1 || K > spec.N - 1)
    throw std::invalid_argument("build_exclusion_generator: K in [1,N-1]");
  SubsetSpace space(spec.N, K);
  if (space.n_states > cap)
    throw std::invalid_argument("build_exclusion_generator: state cap exceeded");
  const RateTable table = make_rate_table(spec);

  SparseGenerator gen;
  gen.n_states = space.n_states;
  std::vector<RowAccumulator> rows(static_cast<std::size_t>(space.n_states));

  std::vector<std::uint8_t> bits, target;
  for (long long s = 0; s < space.n_states; ++s) {
    space.decode(s, bits);
    for (std::size_t ivx = 0; ivx < table.intervals.size(); ++ivx) {
      const Interval& iv = table.intervals[ivx];
      const int len = iv.hi - iv.lo + 1;
      int ones = 0;
      for (int m = 0; m < len; ++m)
        ones += bits[static_cast<std::size_t>(iv.lo - 1 + m)];
      if (ones == 0 || ones == len) continue;  // window content is constant
      // A uniform block permutation lands on each arrangement of the window
      // with probability 1/C(len, ones).
      std::vector<std::uint8_t> window(static_cast<std::size_t>(len), 0);
      std::fill(window.begin(), window.begin() + ones, 1);
      std::sort(window.begin(), window.end());
      long long n_arrangements = 1;
      {
        long long num = 1, den = 1;
        for (int i = 0; i < ones; ++i) {
          num *= len - i;
          den *= i + 1;
        }
        n_arrangements = num / den;
      }
      const Rat per_arrangement = table.exact_rates[ivx] / Rat(n_arrangements);
      target = bits;
      do {
        bool same = true;
        for (int m = 0; m < len; ++m) {
          target[static_cast<std::size_t>(iv.lo - 1 + m)] =
              window[static_cast<std::size_t>(m)];
          same &= window[static_cast<std::size_t>(m)] ==
                  bits[static_cast<std::size_t>(iv.lo - 1 + m)];
        }
        if (!same)
          rows[static_cast<std::size_t>(s)].add(space.encode(target),
                                                per_arrangement);
      } while (std::next_permutation(window.begin(), window.end()));
    }
  }
  finalize(gen, rows, spec.rate_scale);
  return gen;
}

void spmv_uniformized_serial(const SparseGenerator& gen, const double* x,
                             double* y) {
  const double inv_theta = 1.0 / gen.theta;
  for (long long i = 0; i < gen.n_states; ++i) {
    double acc = x[i] * (1.0 - gen.exit_rate[static_cast<std::size_t>(i)] * inv_theta);
    for (std::int64_t e = gen.row_ptr[static_cast<std::size_t>(i)];
         e < gen.row_ptr[static_cast<std::size_t>(i) + 1]; ++e) {
      acc += gen.rate[static_cast<std::size_t>(e)] * inv_theta *
             x[gen.col[static_cast<std::size_t>(e)]];
    }
    y[i] = acc;
  }
}

void spmv_uniformized_omp(const SparseGenerator& gen, const double* x,
                          double* y) {
  const double inv_theta = 1.0 / gen.theta;
  parallel_for_static(gen.n_states, [&](std::int64_t i) {
    double acc = x[i] * (1.0 - gen.exit_rate[static_cast<std::size_t>(i)] * inv_theta);
    for (std::int64_t e = gen.row_ptr[static_cast<std::size_t>(i)];
         e < gen.row_ptr[static_cast<std::size_t>(i) + 1]; ++e) {
      acc += gen.rate[static_cast<std::size_t>(e)] * inv_theta *
             x[gen.col[static_cast<std::size_t>(e)]];
    }
    y[i] = acc;
  });
}

void spmv_uniformized(const SparseGenerator& gen, const double* x, double* y,
                      bool parallel) {
  if (parallel)
    spmv_uniformized_omp(gen, x, y);
  else
    spmv_uniformized_serial(gen, x, y);
}

GapResult spectral_gap(const SparseGenerator& gen, double rel_tol,
                       std::vector<double> start, long long max_iters) {
  const auto n = static_cast<std::size_t>(gen.n_states);
  if (start.size() != n)
    throw std::invalid_argument("spectral_gap: start vector size mismatch");

  std::vector<double> scratch(n);
  const auto sum_of = [&](const std::vector<double>& v) {
    std::copy(v.begin(), v.end(), scratch.begin());
    return pairwise_sum(scratch);
  };
  const auto dot = [&](const std::vector<double>& a,
                       const std::vector<double>& b) {
    for (std::size_t i = 0; i < n; ++i) scratch[i] = a[i] * b[i];
    return pairwise_sum(scratch);
  };
  const auto deflate_normalize = [&](std::vector<double>& v) {
    const double m = sum_of(v) / static_cast<double>(n);
    for (double& x : v) x -= m;
    const double norm = std::sqrt(dot(v, v));
    if (norm == 0.0) throw std::domain_error("spectral_gap: start in span(1)");
    for (double& x : v) x /= norm;
  };

  deflate_normalize(start);
  std::vector<double> v = std::move(start);
  std::vector<double> pv(n), w(n);

  // Successive Rayleigh quotients jitter at the rounding floor of the dot
  // products; treat changes below it as converged.
  const double noise_floor =
      64.0 * gen.theta * std::numeric_limits<double>::epsilon() *
      std::log2(static_cast<double>(n) + 2.0);

  GapResult res;
  double prev_gap = -1.0;
  long long stable = 0;
  for (long long it = 1; it <= max_iters; ++it) {
    spmv_uniformized(gen, v.data(), pv.data());
    // Lazy kernel (I+P)/2 keeps the spectrum in [0,1].
    for (std::size_t i = 0; i < n; ++i) w[i] = 0.5 * (v[i] + pv[i]);
    const double rho = dot(v, w);
    const double gap = 2.0 * gen.theta * (1.0 - rho);
    res.gap = gap;
    res.iterations = it;
    const double tol = std::max(rel_tol * std::max(gap, 0.0), noise_floor);
    if (prev_gap >= 0.0 && std::fabs(gap - prev_gap) <= tol) {
      if (++stable >= 4) {
        res.converged = true;
        return res;
      }
    } else {
      stable = 0;
    }
    prev_gap = gap;
    deflate_normalize(w);
    v.swap(w);
  }
  return res;  // converged stays false; caller decides how to report
}

std::vector<double> phi_start_vector_full(const SparseGenerator& gen,
                                          const PermSpace& space) {
  std::vector<std::int32_t> labels;
  return make_start_vector(gen.n_states, [&](long long i) {
    space.decode(i, labels);
    return phi(Permutation(labels), 1, space.N / 2);
  });
}

std::vector<double> phi_start_vector_exclusion(const SparseGenerator& gen,
                                               const SubsetSpace& space) {
  std::vector<std::uint8_t> bits;
  return make_start_vector(gen.n_states, [&](long long i) {
    space.decode(i, bits);
    const int N = space.N;
    std::vector<double> terms(static_cast<std::size_t>(N - 1));
    long long count = 0;
    for (int x = 1; x <= N - 1; ++x) {
      count += bits[static_cast<std::size_t>(x - 1)];
      const double h = static_cast<double>(count) -
                       static_cast<double>(x) * space.K / N;
      terms[static_cast<std::size_t>(x - 1)] = h * psi(N, 1, x);
    }
    return pairwise_sum(terms);
  });
}

}  // namespace bshuf
