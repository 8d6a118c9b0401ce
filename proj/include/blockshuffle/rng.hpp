#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace bshuf {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Replica streams are derived from (master seed, experiment tag, N, k, replica)
// so results do not depend on scheduling or thread count.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::uint64_t n, std::uint64_t k,
                                 std::uint64_t replica) {
  std::uint64_t s = master ^ fnv1a64(tag);
  splitmix64(s);
  s ^= 0x632be59bd9b4e019ULL * (n + 1);
  splitmix64(s);
  s ^= 0x9e3779b97f4a7c15ULL * (k + 1);
  splitmix64(s);
  s ^= 0xd1b54a32d192ed03ULL * (replica + 1);
  return splitmix64(s);
}

// xoshiro256** with hand-rolled distributions. All draws are fully
// deterministic given the seed, independent of platform stdlib.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform double in [0,1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Unbiased uniform integer in [0, n), n >= 1.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = -n % n;  // 2^64 mod n
    std::uint64_t r;
    do {
      r = next();
    } while (r < limit);
    return r % n;
  }

  // Inclusive range.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  double exponential(double rate) {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return -std::log(u) / rate;
  }

  // Poisson draw; sequential inversion for small mean, PTRS otherwise.
  long long poisson(double mu) {
    if (mu <= 0.0) return 0;
    if (mu < 12.0) {
      const double l = std::exp(-mu);
      long long k = 0;
      double p = uniform();
      while (p > l) {
        p *= uniform();
        ++k;
      }
      return k;
    }
    return poisson_ptrs(mu);
  }

  // Fisher-Yates over a range.
  template <class It>
  void shuffle(It first, It last) {
    auto n = last - first;
    for (decltype(n) i = n - 1; i > 0; --i) {
      auto j = static_cast<decltype(n)>(below(static_cast<std::uint64_t>(i + 1)));
      std::swap(first[i], first[j]);
    }
  }

 private:
  std::uint64_t s_[4];

  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  long long poisson_ptrs(double mu) {
    const double b = 0.931 + 2.53 * std::sqrt(mu);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mu = std::log(mu);
    for (;;) {
      const double u = uniform() - 0.5;
      const double v = uniform();
      const double us = 0.5 - std::fabs(u);
      const auto k = static_cast<long long>(
          std::floor((2.0 * a / us + b) * u + mu + 0.43));
      if (us >= 0.07 && v <= v_r) return k;
      if (k < 0 || (us < 0.013 && v > us)) continue;
      if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
          k * log_mu - mu - std::lgamma(static_cast<double>(k) + 1.0)) {
        return k;
      }
    }
  }
};

}  // namespace bshuf
