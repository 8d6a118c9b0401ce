// Benchmarks the OpenMP kernels against their serial reference paths:
// uniformized sparse matrix-vector products and the replica farm.

#include <chrono>
#include <cstdio>

#include "blockshuffle/estimators.hpp"
#include "blockshuffle/generator.hpp"
#include "blockshuffle/parallel.hpp"

using namespace bshuf;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void bench_spmv() {
  const SparseGenerator gen =
      build_exclusion_generator({Variant::with_boundaries, 22, 4}, 5, 500000);
  std::vector<double> x(static_cast<std::size_t>(gen.n_states)), y(x.size());
  Rng rng(1);
  for (double& v : x) v = rng.uniform();
  const int reps = 300;

  auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) {
    spmv_uniformized_serial(gen, x.data(), y.data());
    x.swap(y);
  }
  const double serial = seconds_since(t0);

  t0 = Clock::now();
  for (int r = 0; r < reps; ++r) {
    spmv_uniformized_omp(gen, x.data(), y.data());
    x.swap(y);
  }
  const double omp = seconds_since(t0);

  std::printf("spmv      states=%lld reps=%d serial=%.3fs omp=%.3fs speedup=%.2fx\n",
              static_cast<long long>(gen.n_states), reps, serial, omp,
              serial / omp);
}

void bench_replicas() {
  const ShuffleSpec spec{Variant::with_boundaries, 64, 3};
  const std::vector<double> grid{5.0, 20.0, 60.0};
  const int reps = 400;

  set_threads(1);
  auto t0 = Clock::now();
  auto a = sample_phi_grid(spec, grid, reps, 7);
  const double serial = seconds_since(t0);

  set_threads(max_threads());
  t0 = Clock::now();
  auto b = sample_phi_grid(spec, grid, reps, 7);
  const double omp = seconds_since(t0);

  std::printf("replicas  n=%d serial=%.3fs omp(%d threads)=%.3fs speedup=%.2fx%s\n",
              reps, serial, max_threads(), omp, serial / omp,
              a == b ? "" : "  MISMATCH");
}

}  // namespace

int main() {
  bench_spmv();
  bench_replicas();
  return 0;
}
