#pragma once

#include <utility>
#include <vector>

#include "blockshuffle/generator.hpp"

namespace bshuf {

// Probability vector over a generator's state enumeration.
using Dist = std::vector<double>;

Dist point_mass(long long n_states, long long at);
Dist uniform_dist(long long n_states);

// (1/2) sum |mu - nu|.
double tv_distance(const Dist& mu, const Dist& nu);

// exp(tL) mu0 via uniformization: Poisson-weighted powers of I + L/theta,
// truncated once the missed Poisson mass is below tol, then renormalized.
Dist evolve(const SparseGenerator& gen, const Dist& mu0, double t,
            double tol = 1e-12, bool parallel = true);

// Smallest t with tv(evolve from start, uniform) < eps, located by geometric
// bracketing from t = 1 and bisection to relative width rel_tol. The TV
// values seen along the way are appended to curve when given (they must be
// nonincreasing in t for this chain).
double exact_mixing_time(const SparseGenerator& gen, long long start_state,
                         double eps, double rel_tol = 1e-3,
                         std::vector<std::pair<double, double>>* curve = nullptr);

// Exact mixing time of the exclusion projection started from the projection
// of the identity; a certified lower bound on the full chain's t_mix(eps).
double projection_mixing_lower(const ShuffleSpec& spec, int K, double eps,
                               double rel_tol = 1e-3, long long cap = 500000);

}  // namespace bshuf
