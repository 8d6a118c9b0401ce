#include "blockshuffle/distribution.hpp"

#include <cmath>
#include <stdexcept>

namespace bshuf {

Dist point_mass(long long n_states, long long at) {
  Dist d(static_cast<std::size_t>(n_states), 0.0);
  d[static_cast<std::size_t>(at)] = 1.0;
  return d;
}

Dist uniform_dist(long long n_states) {
  return Dist(static_cast<std::size_t>(n_states),
              1.0 / static_cast<double>(n_states));
}

double tv_distance(const Dist& mu, const Dist& nu) {
  if (mu.size() != nu.size())
    throw std::invalid_argument("tv_distance: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) acc += std::fabs(mu[i] - nu[i]);
  return 0.5 * acc;
}

Dist evolve(const SparseGenerator& gen, const Dist& mu0, double t, double tol,
            bool parallel) {
  if (t < 0.0) throw std::invalid_argument("evolve: t >= 0");
  if (mu0.size() != static_cast<std::size_t>(gen.n_states))
    throw std::invalid_argument("evolve: distribution size mismatch");
  if (t == 0.0) return mu0;

  const double mu = gen.theta * t;
  // Poisson weights collected outward from the mode in log space.
  const auto logpmf = [mu](long long m) {
    return -mu + static_cast<double>(m) * std::log(mu) -
           std::lgamma(static_cast<double>(m) + 1.0);
  };
  const auto mode = static_cast<long long>(std::floor(mu));
  long long hi = mode;
  double mass = std::exp(logpmf(mode));
  while (mass < 1.0 - tol) {
    ++hi;
    const double w = std::exp(logpmf(hi));
    mass += w;
    if (hi > mode) {
      const long long lo_candidate = 2 * mode - hi;
      if (lo_candidate >= 0) mass += std::exp(logpmf(lo_candidate));
    }
    if (hi > mode + 20 * static_cast<long long>(std::sqrt(mu) + 10.0)) break;
  }

  Dist out(mu0.size(), 0.0);
  Dist cur = mu0;
  Dist next(mu0.size());
  double collected = 0.0;
  for (long long m = 0; m <= hi; ++m) {
    const double w = std::exp(logpmf(m));
    if (w > 0.0) {
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * cur[i];
      collected += w;
    }
    if (m < hi) {
      spmv_uniformized(gen, cur.data(), next.data(), parallel);
      cur.swap(next);
    }
  }
  if (collected <= 0.0) throw std::domain_error("evolve: weights underflowed");
  const double inv = 1.0 / collected;
  for (double& x : out) x *= inv;
  return out;
}

double exact_mixing_time(const SparseGenerator& gen, long long start_state,
                         double eps, double rel_tol,
                         std::vector<std::pair<double, double>>* curve) {
  if (eps <= 0.0 || eps >= 1.0)
    throw std::invalid_argument("exact_mixing_time: eps in (0,1)");
  const Dist start = point_mass(gen.n_states, start_state);
  const Dist target = uniform_dist(gen.n_states);
  const auto tv_at = [&](double t) {
    const double v = tv_distance(evolve(gen, start, t), target);
    if (curve != nullptr) curve->emplace_back(t, v);
    return v;
  };

  if (tv_at(0.0) < eps) return 0.0;
  double t_hi = 1.0;
  int grow = 0;
  while (tv_at(t_hi) >= eps) {
    t_hi *= 2.0;
    if (++grow > 80) throw std::runtime_error("exact_mixing_time: no bracket");
  }
  double t_lo = t_hi > 1.0 ? t_hi / 2.0 : 0.0;
  while (t_hi - t_lo > rel_tol * t_hi) {
    const double mid = 0.5 * (t_lo + t_hi);
    if (tv_at(mid) < eps)
      t_hi = mid;
    else
      t_lo = mid;
  }
  return 0.5 * (t_lo + t_hi);
}

double projection_mixing_lower(const ShuffleSpec& spec, int K, double eps,
                               double rel_tol, long long cap) {
  const SparseGenerator gen = build_exclusion_generator(spec, K, cap);
  const SubsetSpace space(spec.N, K);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(spec.N), 0);
  std::fill(bits.begin(), bits.begin() + K, 1);  // projection of the identity
  return exact_mixing_time(gen, space.encode(bits), eps, rel_tol);
}

}  // namespace bshuf
