#pragma once

#include "dhjlab/cube.hpp"
#include "dhjlab/rational.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dhjlab {

/// Coordinates I fixed to z; the survivors keep their relative order.
struct Restriction {
  int n = 0;
  std::vector<int> I;  // sorted, 0-based
  Word z;              // one symbol per element of I
  Rational delta = 1;
  std::uint64_t seed = 0;
  std::string source;  // label of the law z was drawn from

  std::vector<int> survivors() const;
  int survivor_count() const { return n - static_cast<int>(I.size()); }
};

/// Sorts I, carrying z along, and validates it: distinct, in range, |z| == |I|.
Restriction make_restriction(int n, std::vector<int> I, Word z);

/// The same restriction with z pushed through pi1 (zero_one) or pi2 (zero_two).
Restriction restriction_for_side(const Restriction& r, Side side);

/// {y : (y, z) in S}, a set of the same side in dimension n - |I|.
CubeSet restrict_set(const CubeSet& set, const Restriction& r);

/// Each coordinate joins I with probability 1 - delta; z is drawn from law on I.
Restriction sample_restriction(int n, const Rational& delta, const CoordLaw& law, std::uint64_t seed);

struct CollapseSpec {
  std::vector<std::vector<int>> blocks;  // pairwise disjoint, nonempty, 0-based
};

/// Old coordinate -> new coordinate. A block fuses at the position of its smallest member.
std::vector<int> collapse_map(int n, const CollapseSpec& spec);
int collapsed_dim(int n, const CollapseSpec& spec);

/// g_{=T1..TN}: the fused symbol is copied to every block member before lookup.
CubeSet collapse_eq(const CubeSet& set, const CollapseSpec& spec);

struct TvReport {
  Rational exact;
  double bound = 0;  // 10 k / sqrt(|S|)
  bool within_bound = false;
  std::optional<double> sampled;  // empirical estimate when trials > 0
  std::uint64_t trials = 0;
};

/// Distance between uniform on [3]^n and the law of v when T is a uniform
/// k-subset of s_coords and the remaining inputs are uniform.
///
/// Both laws are exchangeable on s_coords and uniform elsewhere, so the
/// distance equals the distance between the laws of the symbol counts on
/// s_coords; the exact value is computed from those counts.
TvReport tv_of_collapse(int n, const std::vector<int>& s_coords, int k, std::uint64_t trials, std::uint64_t seed);

/// Where each root coordinate went: a current coordinate or a fixed symbol.
class Embedding {
 public:
  Embedding() = default;
  static Embedding identity(int n);

  int root_dim() const { return static_cast<int>(target_.size()); }
  int current_dim() const { return current_n_; }
  /// Current coordinate of root coordinate c, or nullopt when fixed.
  std::optional<int> target(int c) const;
  std::optional<std::uint8_t> fixed_symbol(int c) const;

  Embedding after_restriction(const Restriction& r) const;
  Embedding after_collapse(const CollapseSpec& spec) const;

  /// The root word whose membership decides membership of x.
  Word lift_point(std::span<const std::uint8_t> x) const;
  LineTemplate lift_line(const LineTemplate& line) const;

  bool operator==(const Embedding&) const = default;

 private:
  std::vector<int> target_;  // >= 0: current coordinate; -1 - s: fixed to symbol s
  int current_n_ = 0;
};

}  // namespace dhjlab
