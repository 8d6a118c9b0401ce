#pragma once

#include <cstdint>
#include <vector>

#include "blockshuffle/permutation.hpp"
#include "blockshuffle/rates.hpp"
#include "blockshuffle/rational.hpp"

namespace bshuf {

// Enumeration of S_N by Lehmer code (index 0 is the identity).
struct PermSpace {
  int N = 0;
  long long n_states = 0;

  explicit PermSpace(int n);
  void decode(long long idx, std::vector<std::int32_t>& labels) const;
  long long encode(const std::vector<std::int32_t>& labels) const;
};

// Enumeration of K-subsets of [N] (occupancy vectors) in lexicographic order.
struct SubsetSpace {
  int N = 0;
  int K = 0;
  long long n_states = 0;

  SubsetSpace(int n, int k);
  void decode(long long idx, std::vector<std::uint8_t>& bits) const;
  long long encode(const std::vector<std::uint8_t>& bits) const;

 private:
  std::vector<std::vector<long long>> choose_;
};

// Explicit transition rates over an enumerated state space; off-diagonal CSR
// with exact rationals kept alongside the compiled doubles. Reversibility
// w.r.t. uniform makes the rate matrix symmetric.
struct SparseGenerator {
  long long n_states = 0;
  std::vector<std::int64_t> row_ptr;
  std::vector<std::int32_t> col;
  std::vector<double> rate;
  std::vector<Rat> rate_exact;
  std::vector<double> exit_rate;
  double theta = 0.0;  // uniformization constant, max total exit rate

  Rat rate_between(long long from, long long to) const;
};

// rate(eta -> eta') = sum over intervals of rate * #{block perms mapping eta
// to eta'} / |block|!; diagonal omitted.
SparseGenerator build_sparse_generator(const ShuffleSpec& spec,
                                       long long cap = 500000);

// The exclusion projection onto occupancy of the K lowest labels.
SparseGenerator build_exclusion_generator(const ShuffleSpec& spec, int K,
                                          long long cap = 500000);

// y = P x with P = I + L/theta (row-stochastic, symmetric). The serial
// variant is the reference implementation; the OpenMP variant splits by rows
// and reproduces it bit-for-bit for any thread count.
void spmv_uniformized_serial(const SparseGenerator& gen, const double* x,
                             double* y);
void spmv_uniformized_omp(const SparseGenerator& gen, const double* x,
                          double* y);
void spmv_uniformized(const SparseGenerator& gen, const double* x, double* y,
                      bool parallel = true);

struct GapResult {
  double gap = 0.0;
  long long iterations = 0;
  bool converged = false;
};

// Smallest nonzero eigenvalue of -L via power iteration on the lazy
// uniformized kernel (I+P)/2, deflating the uniform direction. Deterministic
// given the starting vector.
GapResult spectral_gap(const SparseGenerator& gen, double rel_tol,
                       std::vector<double> start, long long max_iters = 2000000);

// Height-profile starting vector Phi(state), which is nearly the relevant
// eigenfunction; state_phi(i) must return Phi of state i.
template <class F>
std::vector<double> make_start_vector(long long n_states, F&& state_phi) {
  std::vector<double> v(static_cast<std::size_t>(n_states));
  for (long long i = 0; i < n_states; ++i)
    v[static_cast<std::size_t>(i)] = state_phi(i);
  return v;
}

std::vector<double> phi_start_vector_full(const SparseGenerator& gen,
                                          const PermSpace& space);
std::vector<double> phi_start_vector_exclusion(const SparseGenerator& gen,
                                               const SubsetSpace& space);

}  // namespace bshuf
