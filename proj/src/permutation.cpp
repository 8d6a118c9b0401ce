#include "blockshuffle/permutation.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace bshuf {

bool is_permutation(std::span<const std::int32_t> labels) {
  const auto n = static_cast<std::int32_t>(labels.size());
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (std::int32_t l : labels) {
    if (l < 1 || l > n || seen[static_cast<std::size_t>(l - 1)]) return false;
    seen[static_cast<std::size_t>(l - 1)] = true;
  }
  return true;
}

Permutation::Permutation(std::vector<std::int32_t> labels)
    : labels_(std::move(labels)) {
  if (labels_.empty()) throw std::invalid_argument("Permutation: empty");
  if (!is_permutation(labels_))
    throw std::invalid_argument("Permutation: not a bijection on 1..N");
}

Permutation Permutation::identity(int n) {
  std::vector<std::int32_t> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 1);
  return Permutation(std::move(v));
}

Permutation Permutation::from_csv(const std::string& s) {
  std::vector<std::int32_t> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    v.push_back(static_cast<std::int32_t>(std::strtol(tok.c_str(), nullptr, 10)));
  }
  return Permutation(std::move(v));
}

std::string Permutation::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(labels_[i]);
  }
  return out;
}

Permutation uniform_perm(Rng& rng, int n) {
  std::vector<std::int32_t> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 1);
  rng.shuffle(v.begin(), v.end());
  return Permutation(std::move(v));
}

std::vector<std::int32_t> positions_of_labels(const Permutation& p) {
  std::vector<std::int32_t> pos(static_cast<std::size_t>(p.n()));
  for (int x = 1; x <= p.n(); ++x) pos[static_cast<std::size_t>(p(x) - 1)] = x;
  return pos;
}

Permutation apply_block(const Permutation& eta, const Permutation& block,
                        int i, int j) {
  const int n = eta.n();
  if (i < 1 || j > n || i > j)
    throw std::out_of_range("apply_block: bad interval");
  if (block.n() != j - i + 1)
    throw std::invalid_argument("apply_block: block size mismatch");
  std::vector<std::int32_t> out(eta.labels().begin(), eta.labels().end());
  for (int m = i; m <= j; ++m) {
    out[static_cast<std::size_t>(m - 1)] = eta(block(m - i + 1) + i - 1);
  }
  return Permutation(std::move(out));
}

long long height_num(const Permutation& p, int x, int y) {
  const int n = p.n();
  if (x < 0 || x > n || y < 1 || y > n)
    throw std::out_of_range("height: x in [0,N], y in [1,N]");
  long long count = 0;
  for (int z = 1; z <= x; ++z) count += p(z) <= y;
  return count * n - static_cast<long long>(x) * y;
}

double height(const Permutation& p, int x, int y) {
  return static_cast<double>(height_num(p, x, y)) / p.n();
}

std::vector<double> height_profile(const Permutation& p, int y) {
  const int n = p.n();
  std::vector<double> out(static_cast<std::size_t>(n - 1));
  long long count = 0;
  for (int x = 1; x < n; ++x) {
    count += p(x) <= y;
    out[static_cast<std::size_t>(x - 1)] =
        static_cast<double>(count * n - static_cast<long long>(x) * y) / n;
  }
  return out;
}

std::vector<long long> height_curve_num(const Permutation& p, int y) {
  const int n = p.n();
  std::vector<long long> out(static_cast<std::size_t>(n + 1));
  out[0] = 0;
  long long count = 0;
  for (int x = 1; x <= n; ++x) {
    count += p(x) <= y;
    out[static_cast<std::size_t>(x)] =
        count * n - static_cast<long long>(x) * y;
  }
  return out;
}

bool dominates(const Permutation& a, const Permutation& b) {
  const int n = a.n();
  if (b.n() != n) throw std::invalid_argument("dominates: size mismatch");
  // h_a >= h_b iff the indicator prefix counts agree; the -xy/N offsets cancel.
  for (int y = 1; y <= n; ++y) {
    long long ca = 0, cb = 0;
    for (int x = 1; x <= n; ++x) {
      ca += a(x) <= y;
      cb += b(x) <= y;
      if (ca < cb) return false;
    }
  }
  return true;
}

ExclusionConfig exclusion_project(const Permutation& p, int K) {
  const int n = p.n();
  if (K < 1 || K > n - 1)
    throw std::out_of_range("exclusion_project: K in [1,N-1]");
  ExclusionConfig xi;
  xi.ones_count = K;
  xi.bits.resize(static_cast<std::size_t>(n));
  for (int x = 1; x <= n; ++x)
    xi.bits[static_cast<std::size_t>(x - 1)] = p(x) <= K ? 1 : 0;
  return xi;
}

ExclusionConfig apply_block(const ExclusionConfig& xi, const Permutation& block,
                            int i, int j) {
  const auto n = static_cast<int>(xi.bits.size());
  if (i < 1 || j > n || i > j)
    throw std::out_of_range("apply_block: bad interval");
  if (block.n() != j - i + 1)
    throw std::invalid_argument("apply_block: block size mismatch");
  ExclusionConfig out = xi;
  for (int m = i; m <= j; ++m) {
    out.bits[static_cast<std::size_t>(m - 1)] =
        xi.bits[static_cast<std::size_t>(block(m - i + 1) + i - 2)];
  }
  return out;
}

std::vector<int> skeleton_anchors(int N, int K) {
  std::vector<int> xs(static_cast<std::size_t>(K + 1));
  for (int i = 0; i <= K; ++i)
    xs[static_cast<std::size_t>(i)] =
        static_cast<int>((static_cast<long long>(i) * N + K - 1) / K);
  return xs;
}

namespace {

SkeletonData skeleton_impl(const Permutation& p, int K, bool semi) {
  const int n = p.n();
  if (K < 2 || K > n) throw std::out_of_range("skeleton: K in [2,N]");
  SkeletonData sk;
  sk.K = K;
  sk.denom = n;
  sk.anchors = skeleton_anchors(n, K);
  sk.rows = semi ? n : K;
  sk.cols = K;
  sk.num.resize(static_cast<std::size_t>(sk.rows) * sk.cols);
  for (int c = 0; c < K; ++c) {
    const int y = sk.anchors[static_cast<std::size_t>(c + 1)];
    const auto curve = height_curve_num(p, y);
    for (int r = 0; r < sk.rows; ++r) {
      const int x = semi ? r + 1 : sk.anchors[static_cast<std::size_t>(r + 1)];
      sk.num[static_cast<std::size_t>(r) * sk.cols + c] =
          curve[static_cast<std::size_t>(x)];
    }
  }
  return sk;
}

}  // namespace

SkeletonData semi_skeleton(const Permutation& p, int K) {
  return skeleton_impl(p, K, true);
}

SkeletonData skeleton(const Permutation& p, int K) {
  return skeleton_impl(p, K, false);
}

Permutation within_block_randomize(const Permutation& p, int K, Rng& rng) {
  const int n = p.n();
  const auto xs = skeleton_anchors(n, K);
  // Uniform relabeling tau fixing each label block (x_{i-1}, x_i] setwise.
  std::vector<std::int32_t> tau(static_cast<std::size_t>(n));
  std::iota(tau.begin(), tau.end(), 1);
  for (int i = 1; i <= K; ++i) {
    const int lo = xs[static_cast<std::size_t>(i - 1)];
    const int hi = xs[static_cast<std::size_t>(i)];
    rng.shuffle(tau.begin() + lo, tau.begin() + hi);
  }
  std::vector<std::int32_t> out(static_cast<std::size_t>(n));
  for (int x = 1; x <= n; ++x)
    out[static_cast<std::size_t>(x - 1)] =
        tau[static_cast<std::size_t>(p(x) - 1)];
  return Permutation(std::move(out));
}

}  // namespace bshuf
