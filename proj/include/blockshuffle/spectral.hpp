#pragma once

#include <span>
#include <vector>

#include "blockshuffle/permutation.hpp"
#include "blockshuffle/rates.hpp"
#include "blockshuffle/rational.hpp"

namespace bshuf {

// psi_j(x) = sin(x*j*pi/N), with exact zeros whenever x*j is a multiple of N
// (in particular at x = 0 and x = N).
double psi(int N, int j, int x);

// psi_j(x) for x = 0..N.
std::vector<double> psi_table(int N, int j);

// lambda^(j)_{N,k} = (k-1) - 2 * sum_{i=1}^{k} ((k-i)/k) cos(i*j*pi/N),
// accumulated by pairwise summation.
double lambda_approx(int N, int k, int j);

// Leading term k*j^2*pi^2*(k^2-1) / (12*N^2).
double lambda_leading(int N, int k, int j);

// Phi^(j)_{N,y}(sigma) = sum_{x=1}^{N-1} h_sigma(x,y) psi_j(x).
double phi(const Permutation& p, int j, int y);

// Phi from a precomputed height curve (numerators of N*h, x = 0..N).
double phi_from_curve(std::span<const long long> hnum, int N, int j);

// Linear interpolation of a height profile between node positions a and b:
// (b-x)/(b-a)*h(a) + (x-a)/(b-a)*h(b). A window update on positions [lo,hi]
// leaves h(lo-1) and h(hi) unchanged, so callers pass a = lo-1, b = hi.
double interpolate_height(std::span<const double> curve, int a, int b, int x);

// Exact (L Phi^(j)_{N,y})(sigma) in O(N*k): Phi is linear in the height
// profile, so each interval contributes rate * (Phi of the interpolated
// expected profile - Phi(sigma)).
double generator_apply_phi(const Permutation& p, const RateTable& table, int j,
                           int y);

// Same quantity by full enumeration: sum over intervals and all block
// permutations weighted 1/|block|!. Exponential in the interval length; used
// to pin down the O(N*k) path at small sizes.
double generator_apply_phi_enumerated(const Permutation& p,
                                      const RateTable& table, int j, int y);

// |(-L Phi)(sigma) - lambda * Phi(sigma)|.
double eigen_residual(const Permutation& p, const RateTable& table, int j,
                      int y);

// Residual of the interior relation
//   lambda^(j)_{N,k} psi_j(x) =
//     (k-1) psi_j(x) - sum_{i=1}^{k-1} ((k-i)/k)(psi_j(x-i) + psi_j(x+i)),
// which holds to rounding for k <= x <= N-k.
double interior_identity_residual(int N, int k, int j, int x);

// Exact-rational residual of the boundary relation
//   (delta_x/x) sum_{i=1}^{x-1} i^2
//     - (x - k + 1 + sum_{i=x+1}^{k-1} delta_i) * x
//     = sum_{i=1}^{k-1} ((k-i)/k)(x-i)
// for 1 <= x <= k-1, k >= 3; the x = 1 delta-term multiplies an empty sum.
Rat boundary_identity_residual(int k, int x);

// 8*min(y,N-y)*exp(-t*lambda^(1)_{N,k}) + C*k^3 with caller-supplied C.
double expected_height_decay_bound(int N, int k, int y, double t, double C);

}  // namespace bshuf
