#pragma once

#include "dhjlab/rational.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dhjlab {

inline constexpr int kMaxDim = 20;
inline constexpr std::uint8_t kWildcard = 3;

/// A word over {0,1,2}, coordinate 1 first.
using Word = std::vector<std::uint8_t>;

std::uint64_t pow3(int n);

/// Base-3 index with coordinate 1 most significant.
std::uint64_t point_index(std::span<const std::uint8_t> digits);
Word point_digits(std::uint64_t index, int n);

/// pi1 keeps the 1s and sends 2 to 0; pi2 keeps the 2s and sends 1 to 0.
Word pi1(std::span<const std::uint8_t> digits);
Word pi2(std::span<const std::uint8_t> digits);
inline std::uint8_t pi1(std::uint8_t d) { return d == 1 ? 1 : 0; }
inline std::uint8_t pi2(std::uint8_t d) { return d == 2 ? 2 : 0; }

Word parse_word(std::string_view text);
std::string format_word(std::span<const std::uint8_t> digits);

/// full: membership over [3]^n. zero_one: a subset of {0,1}^n. zero_two: a subset of {0,2}^n.
enum class Side { full, zero_one, zero_two };

std::string_view to_string(Side side);
Side parse_side(std::string_view text);

/// Dense bit-vector subset of [3]^n, {0,1}^n or {0,2}^n.
///
/// Full sets are indexed by the base-3 point index. One-sided sets store
/// 2^n cells indexed in binary (coordinate 1 most significant), bit set
/// where the digit is the side's nonzero symbol.
class CubeSet {
 public:
  CubeSet() = default;
  CubeSet(int n, Side side);

  static CubeSet full(int n, Side side = Side::full);
  static CubeSet from_words(int n, Side side, std::span<const Word> words);

  int dim() const { return n_; }
  Side side() const { return side_; }
  std::uint64_t cells() const { return cells_; }
  std::uint64_t size() const;
  bool empty() const { return size() == 0; }

  bool has_cell(std::uint64_t cell) const { return (bits_[cell >> 6] >> (cell & 63)) & 1ULL; }
  void set_cell(std::uint64_t cell, bool value = true);

  /// Membership of a word written over the side's own alphabet.
  bool contains(std::span<const std::uint8_t> word) const;
  /// Membership of x in [3]^n, through pi1/pi2 for one-sided sets.
  bool contains_point(std::uint64_t index3) const;

  std::uint64_t cell_of(std::span<const std::uint8_t> word) const;
  Word word_of(std::uint64_t cell) const;
  std::vector<Word> words() const;

  bool subset_of(const CubeSet& other) const;
  CubeSet intersect(const CubeSet& other) const;
  CubeSet unite(const CubeSet& other) const;
  CubeSet complement() const;

  /// The symbol a one-sided set uses for "nonzero" (1 or 2); 0 for full sets.
  std::uint8_t side_symbol() const;

  bool operator==(const CubeSet& other) const = default;

  const std::vector<std::uint64_t>& raw_bits() const { return bits_; }

 private:
  void check_compatible(const CubeSet& other) const;

  int n_ = 0;
  Side side_ = Side::full;
  std::uint64_t cells_ = 1;
  std::vector<std::uint64_t> bits_ = std::vector<std::uint64_t>(1, 0);
};

/// Binary cell of pi1(x) / pi2(x) for x given by its base-3 index.
std::uint64_t pi1_cell(std::uint64_t index3, int n);
std::uint64_t pi2_cell(std::uint64_t index3, int n);

/// {x in [3]^n : pi(x) in E} for one-sided E; identity on full sets.
CubeSet pullback(const CubeSet& set);

/// A combinatorial line encoded as a word over {0,1,2,*} with at least one *.
struct LineTemplate {
  Word word;  // kWildcard marks *

  int dim() const { return static_cast<int>(word.size()); }
  int wildcard_count() const;
  /// Indices of the instantiations * -> 0, 1, 2.
  std::array<std::uint64_t, 3> points() const;
  std::string to_string() const;

  static LineTemplate from_base_step(std::uint64_t base, std::uint64_t step, int n);
  bool operator==(const LineTemplate&) const = default;
};

/// Visits every line as (base, step): points base, base+step, base+2*step.
/// The visitor returns false to stop early.
void for_each_line(int n, const std::function<bool(std::uint64_t, std::uint64_t)>& visit);

std::uint64_t line_count(int n);  // 4^n - 3^n
std::vector<LineTemplate> enumerate_lines(int n);

struct LineSearch {
  std::uint64_t count = 0;
  std::vector<LineTemplate> witnesses;
};

/// Lines with all three points in S (one-sided sets are pulled back first).
LineSearch lines_in_set(const CubeSet& set, std::size_t max_witnesses = 0);
bool is_line_free(const CubeSet& set);
std::optional<LineTemplate> find_line(const CubeSet& set);

/// True iff the three indices form a combinatorial line in [3]^n.
bool is_line(std::uint64_t a, std::uint64_t b, std::uint64_t c, int n);

/// E1 (zero-one) box E2 (zero-two): {x : pi1(x) in E1 and pi2(x) in E2}.
CubeSet disjoint_product(const CubeSet& e1, const CubeSet& e2);

/// A law on {0,1,2}; entries sum to one.
using CoordLaw = std::array<Rational, 3>;
CoordLaw uniform_law();

/// Exact product measure of S (pulled back for one-sided sets).
/// laws holds one law per coordinate, or a single law used for every coordinate.
Rational measure(const CubeSet& set, std::span<const CoordLaw> laws);
Rational uniform_measure(const CubeSet& set);

}  // namespace dhjlab
