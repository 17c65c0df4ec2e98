#pragma once

#include "dhjlab/cube.hpp"
#include "dhjlab/rational.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dhjlab {

using Alphabet = std::vector<std::uint8_t>;

struct DistRow {
  Word t;
  Rational p;
  bool operator==(const DistRow&) const = default;
};

/// Exact distribution on Sigma_1 x ... x Sigma_k with rational masses.
///
/// Rows are kept sorted by tuple; masses are strictly positive and sum to
/// exactly one. Coordinate names are optional labels carried through the
/// operations below.
class JointDist {
 public:
  JointDist() = default;
  JointDist(std::vector<Alphabet> alphabets, std::vector<DistRow> rows, std::vector<std::string> names = {});

  /// Like the constructor but merges repeated tuples and drops zero rows.
  static JointDist merged(std::vector<Alphabet> alphabets, std::vector<DistRow> rows,
                          std::vector<std::string> names = {});

  std::size_t arity() const { return alphabets_.size(); }
  const std::vector<Alphabet>& alphabets() const { return alphabets_; }
  const std::vector<DistRow>& rows() const { return rows_; }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t coord(std::string_view name) const;

  Rational prob(std::span<const std::uint8_t> tuple) const;
  std::vector<Word> support() const;

  JointDist renamed(std::vector<std::string> names) const;

  /// Equality of alphabets and rows; names are labels and do not take part.
  bool operator==(const JointDist& other) const {
    return alphabets_ == other.alphabets_ && rows_ == other.rows_;
  }

 private:
  std::vector<Alphabet> alphabets_;
  std::vector<DistRow> rows_;
  std::vector<std::string> names_;
};

/// The line distribution on [3]^3 with atoms (0,0,0), (1,1,1), (2,2,2), (0,1,2).
JointDist dhj_distribution(const Rational& w000, const Rational& w111, const Rational& w222, const Rational& w012);

/// dhj_distribution(1/6, 1/3, 1/3, 1/6).
JointDist atom_distribution();

JointDist point_mass(std::vector<Alphabet> alphabets, Word tuple);
JointDist uniform_on(std::vector<Alphabet> alphabets, std::span<const Word> tuples);
/// Single-coordinate law over {0,1,2} as a JointDist (zero entries dropped).
JointDist law_dist(const CoordLaw& law);
CoordLaw to_law(const JointDist& d);  // arity-1 distributions over subsets of {0,1,2}

/// Pushforward onto coords, in the order given (duplicates allowed).
JointDist marginal(const JointDist& d, std::span<const std::size_t> coords);

/// Law of the remaining coordinates given d[coords] == values. Throws EmptyCondition.
JointDist condition(const JointDist& d, std::span<const std::size_t> coords, std::span<const std::uint8_t> values);

/// Draw w from the keep-marginal, then two conditionally independent copies of
/// the other coordinates. Output coordinates: the original ones in order,
/// followed by the fresh copies of the non-kept ones in order.
JointDist cs_duplicate(const JointDist& d, std::span<const std::size_t> keep,
                       std::vector<std::string> copy_names = {});

enum class SymbolMap { identity, pi1, pi2 };

struct Projection {
  std::size_t coord;
  SymbolMap map;
};

/// Pushforward under coordinatewise symbol maps; output has one coordinate per projection.
JointDist project_symbols(const JointDist& d, std::span<const Projection> projections);

struct Decomposition {
  Rational beta;
  std::optional<JointDist> residual;  // absent when beta == 1
};

/// d = beta * component + (1 - beta) * residual with the largest feasible beta.
Decomposition decompose(const JointDist& d, const JointDist& component);

/// beta * a + (1 - beta) * b on identical alphabets.
JointDist mixture(const Rational& beta, const JointDist& a, const JointDist& b);

Rational tv_distance(const JointDist& a, const JointDist& b);

/// Every full-support law on the alphabet whose masses have denominators <= cap.
std::vector<JointDist> enumerate_Q(const Alphabet& alphabet, const BigInt& max_denominator);
inline constexpr unsigned kQEnumerationCap = 64;

// ---------------------------------------------------------------------------
// The flip chain: y(0) uniform, each later step turns a 1 into a 2 with probability p.

struct ChainParams {
  unsigned K = 1;
  Rational eta_prime;
  Rational eta;
  unsigned long n = 1;
  Rational p;  // flip probability, a rational stand-in for eta'/sqrt(n)

  /// Validates K * eta' <= eta / 100 and 0 < p < 1.
  static ChainParams make(unsigned K, Rational eta_prime, Rational eta, unsigned long n, Rational p);
  /// p = eta' / s with s a rational upper approximation of sqrt(n), so p <= eta'/sqrt(n).
  static ChainParams rounded(unsigned K, Rational eta_prime, Rational eta, unsigned long n, unsigned digits = 12);
};

/// Per-coordinate law of y(i).
JointDist chain_marginal(const ChainParams& params, unsigned i);
/// Per-coordinate joint law of (y(i), y(j)), i < j.
JointDist chain_pair(const ChainParams& params, unsigned i, unsigned j);
/// The unique law on the four line atoms whose (y, z) marginal is xi.
JointDist lift_pair_to_line(const JointDist& xi);

// ---------------------------------------------------------------------------
// The duplication chain used for the four-wise average.

/// mu1 on (x, y, x', y', z).
JointDist build_mu1(const JointDist& line);
/// mu2 on (x, x', x'', x''', y, y', z, z').
JointDist build_mu2(const JointDist& mu1);
/// mu3 on (pi1 y, pi1 y', pi1 y'', pi1 y''', pi2 z, pi2 z', pi2 z'', pi2 z''').
JointDist build_mu3(const JointDist& mu2);
/// mu4 on (y, y'', y~, y~''): duplicate the y, y'' slots of mu3 given the rest.
JointDist build_mu4(const JointDist& mu3);

}  // namespace dhjlab
