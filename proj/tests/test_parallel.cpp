#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "blockshuffle/estimators.hpp"
#include "blockshuffle/generator.hpp"
#include "blockshuffle/parallel.hpp"

using namespace bshuf;

TEST_CASE("parallel_for matches serial_for") {
  std::vector<double> a(1000), b(1000);
  serial_for(1000, [&](std::int64_t i) { a[static_cast<std::size_t>(i)] = i * 1.5; });
  parallel_for(1000, [&](std::int64_t i) { b[static_cast<std::size_t>(i)] = i * 1.5; });
  CHECK(a == b);
}

TEST_CASE("spmv identical across thread counts") {
  const SparseGenerator gen =
      build_sparse_generator({Variant::with_boundaries, 7, 3});
  std::vector<double> x(static_cast<std::size_t>(gen.n_states));
  Rng rng(5);
  for (double& v : x) v = rng.uniform() - 0.5;
  std::vector<double> serial(x.size()), omp1(x.size()), omp4(x.size());
  spmv_uniformized_serial(gen, x.data(), serial.data());
  set_threads(1);
  spmv_uniformized_omp(gen, x.data(), omp1.data());
  set_threads(4);
  spmv_uniformized_omp(gen, x.data(), omp4.data());
  CHECK(serial == omp1);
  CHECK(serial == omp4);
  set_threads(max_threads());
}

TEST_CASE("replica farms identical across thread counts") {
  const ShuffleSpec spec{Variant::with_boundaries, 24, 3};
  set_threads(1);
  const auto phi1 = sample_phi_grid(spec, {2.0, 5.0}, 64, 99);
  const CouplingTaus tau1 = coupling_taus(spec, 40, 300.0, 99);
  set_threads(3);
  const auto phi3 = sample_phi_grid(spec, {2.0, 5.0}, 64, 99);
  const CouplingTaus tau3 = coupling_taus(spec, 40, 300.0, 99);
  set_threads(max_threads());
  CHECK(phi1 == phi3);
  CHECK(tau1.taus == tau3.taus);
}
