#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "blockshuffle/rng.hpp"

namespace bshuf {

// Deck states. Positions and labels are 1-based everywhere in the API and in
// file formats; internally labels_[p-1] holds the label at position p. Labels
// run over 1..N and each appears exactly once.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<std::int32_t> labels);

  static Permutation identity(int n);
  static Permutation from_csv(const std::string& s);

  int n() const { return static_cast<int>(labels_.size()); }
  std::int32_t operator()(int pos) const { return labels_[pos - 1]; }
  std::span<const std::int32_t> labels() const { return labels_; }

  // Comma-separated 1-based label list, e.g. "2,4,7,5,1,3,6".
  std::string to_csv() const;

  bool operator==(const Permutation&) const = default;

 private:
  std::vector<std::int32_t> labels_;
};

bool is_permutation(std::span<const std::int32_t> labels);

Permutation uniform_perm(Rng& rng, int n);

// Inverse as position-of-label: result[label-1] = position.
std::vector<std::int32_t> positions_of_labels(const Permutation& p);

// Rearranges the window [i,j]: output position m receives the label that sat
// at window position block(m - i + 1), i.e. at absolute position
// block(m - i + 1) + i - 1. block must have size j - i + 1.
Permutation apply_block(const Permutation& eta, const Permutation& block,
                        int i, int j);

// Height function h(x,y) = #{z <= x : sigma(z) <= y} - x*y/N.
// Stored exactly as the integer numerator of N*h so that equalities and the
// partial order are exact; doubles are derived views.
long long height_num(const Permutation& p, int x, int y);
double height(const Permutation& p, int x, int y);

// h(x,y) for x = 1..N-1 at fixed y.
std::vector<double> height_profile(const Permutation& p, int y);

// Integer numerators of N*h(x,y) for x = 0..N (both ends are exactly 0).
std::vector<long long> height_curve_num(const Permutation& p, int y);

// sigma dominates sigma2: h_sigma(x,y) >= h_sigma2(x,y) for all x,y in [N].
bool dominates(const Permutation& a, const Permutation& b);

struct ExclusionConfig {
  std::vector<std::uint8_t> bits;
  int ones_count = 0;
};

// bits[x-1] = 1 iff the label at position x is at most K, 1 <= K <= N-1.
ExclusionConfig exclusion_project(const Permutation& p, int K);

// Induced block action on occupancy bits (same positional rearrangement).
ExclusionConfig apply_block(const ExclusionConfig& xi, const Permutation& block,
                            int i, int j);

// Anchor positions x_i = ceil(i*N/K) for i = 0..K.
std::vector<int> skeleton_anchors(int N, int K);

// Height values recorded at anchor thresholds; numerators of N*h with the
// shared denominator N.
struct SkeletonData {
  int K = 0;
  int denom = 1;
  std::vector<int> anchors;      // x_0..x_K
  int rows = 0, cols = 0;        // semi-skeleton: N x K; skeleton: K x K
  std::vector<long long> num;    // row-major numerators
  long long at_num(int r, int c) const { return num[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return static_cast<double>(at_num(r, c)) / denom; }
  bool operator==(const SkeletonData&) const = default;
};

// Semi-skeleton: h(x, x_i) for x in [N], i in [K] (rows indexed by x-1).
SkeletonData semi_skeleton(const Permutation& p, int K);
// Skeleton: h(x_m, x_i) for m, i in [K].
SkeletonData skeleton(const Permutation& p, int K);

// Composes p with an independent uniform relabeling inside each label block
// (x_{i-1}, x_i]; the skeleton for the same K is unchanged.
Permutation within_block_randomize(const Permutation& p, int K, Rng& rng);

}  // namespace bshuf
