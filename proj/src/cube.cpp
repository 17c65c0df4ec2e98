#include "dhjlab/cube.hpp"

#include "dhjlab/errors.hpp"

#include <algorithm>
#include <bit>
#include <map>

namespace dhjlab {

std::uint64_t pow3(int n) {
  std::uint64_t p = 1;
  for (int i = 0; i < n; ++i) p *= 3;
  return p;
}

std::uint64_t point_index(std::span<const std::uint8_t> digits) {
  if (digits.size() > static_cast<std::size_t>(kMaxDim)) {
    throw InvalidArgument("point dimension exceeds " + std::to_string(kMaxDim));
  }
  std::uint64_t index = 0;
  for (std::uint8_t d : digits) {
    if (d > 2) throw InvalidArgument("digit outside {0,1,2}: " + std::to_string(d));
    index = index * 3 + d;
  }
  return index;
}

Word point_digits(std::uint64_t index, int n) {
  if (n < 0 || n > kMaxDim) throw InvalidArgument("dimension out of range");
  if (index >= pow3(n)) throw InvalidArgument("index out of range for dimension");
  Word digits(static_cast<std::size_t>(n));
  for (int i = n - 1; i >= 0; --i) {
    digits[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(index % 3);
    index /= 3;
  }
  return digits;
}

Word pi1(std::span<const std::uint8_t> digits) {
  Word out(digits.begin(), digits.end());
  for (auto& d : out) d = pi1(d);
  return out;
}

Word pi2(std::span<const std::uint8_t> digits) {
  Word out(digits.begin(), digits.end());
  for (auto& d : out) d = pi2(d);
  return out;
}

Word parse_word(std::string_view text) {
  Word out;
  out.reserve(text.size());
  for (char c : text) {
    if (c < '0' || c > '2') throw InvalidArgument("digit outside {0,1,2} in \"" + std::string(text) + "\"");
    out.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return out;
}

std::string format_word(std::span<const std::uint8_t> digits) {
  std::string out;
  out.reserve(digits.size());
  for (std::uint8_t d : digits) out.push_back(d == kWildcard ? '*' : static_cast<char>('0' + d));
  return out;
}

std::string_view to_string(Side side) {
  switch (side) {
    case Side::full: return "full";
    case Side::zero_one: return "zero-one";
    case Side::zero_two: return "zero-two";
  }
  return "full";
}

Side parse_side(std::string_view text) {
  if (text == "full") return Side::full;
  if (text == "zero-one") return Side::zero_one;
  if (text == "zero-two") return Side::zero_two;
  throw InvalidArgument("unknown side: " + std::string(text));
}

// ---------------------------------------------------------------------------
// CubeSet

CubeSet::CubeSet(int n, Side side) : n_(n), side_(side) {
  if (n < 0 || n > kMaxDim) throw InvalidArgument("dimension must lie in [0, 20]");
  cells_ = side == Side::full ? pow3(n) : (1ULL << n);
  bits_.assign((cells_ + 63) / 64, 0);
}

CubeSet CubeSet::full(int n, Side side) {
  CubeSet s(n, side);
  for (auto& w : s.bits_) w = ~0ULL;
  if (s.cells_ % 64 != 0) s.bits_.back() = (1ULL << (s.cells_ % 64)) - 1;
  return s;
}

CubeSet CubeSet::from_words(int n, Side side, std::span<const Word> words) {
  CubeSet s(n, side);
  for (const auto& w : words) s.set_cell(s.cell_of(w));
  return s;
}

std::uint64_t CubeSet::size() const {
  std::uint64_t total = 0;
  for (auto w : bits_) total += static_cast<std::uint64_t>(std::popcount(w));
  return total;
}

void CubeSet::set_cell(std::uint64_t cell, bool value) {
  if (cell >= cells_) throw InvalidArgument("cell out of range");
  if (value) {
    bits_[cell >> 6] |= 1ULL << (cell & 63);
  } else {
    bits_[cell >> 6] &= ~(1ULL << (cell & 63));
  }
}

std::uint8_t CubeSet::side_symbol() const {
  switch (side_) {
    case Side::zero_one: return 1;
    case Side::zero_two: return 2;
    default: return 0;
  }
}

std::uint64_t CubeSet::cell_of(std::span<const std::uint8_t> word) const {
  if (word.size() != static_cast<std::size_t>(n_)) throw InvalidArgument("word length does not match dimension");
  if (side_ == Side::full) return point_index(word);
  const std::uint8_t sym = side_symbol();
  std::uint64_t cell = 0;
  for (std::uint8_t d : word) {
    if (d != 0 && d != sym) {
      throw InvalidArgument("symbol " + std::to_string(d) + " not allowed in a " + std::string(to_string(side_)) + " set");
    }
    cell = (cell << 1) | (d == sym ? 1U : 0U);
  }
  return cell;
}

Word CubeSet::word_of(std::uint64_t cell) const {
  if (side_ == Side::full) return point_digits(cell, n_);
  Word w(static_cast<std::size_t>(n_));
  const std::uint8_t sym = side_symbol();
  for (int i = n_ - 1; i >= 0; --i) {
    w[static_cast<std::size_t>(i)] = (cell & 1ULL) ? sym : 0;
    cell >>= 1;
  }
  return w;
}

bool CubeSet::contains(std::span<const std::uint8_t> word) const { return has_cell(cell_of(word)); }

bool CubeSet::contains_point(std::uint64_t index3) const {
  switch (side_) {
    case Side::full: return has_cell(index3);
    case Side::zero_one: return has_cell(pi1_cell(index3, n_));
    case Side::zero_two: return has_cell(pi2_cell(index3, n_));
  }
  return false;
}

std::vector<Word> CubeSet::words() const {
  std::vector<Word> out;
  for (std::uint64_t c = 0; c < cells_; ++c) {
    if (has_cell(c)) out.push_back(word_of(c));
  }
  return out;
}

void CubeSet::check_compatible(const CubeSet& other) const {
  if (n_ != other.n_ || side_ != other.side_) throw InvalidArgument("set dimension or side mismatch");
}

bool CubeSet::subset_of(const CubeSet& other) const {
  check_compatible(other);
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] & ~other.bits_[i]) return false;
  }
  return true;
}

CubeSet CubeSet::intersect(const CubeSet& other) const {
  check_compatible(other);
  CubeSet out = *this;
  for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] &= other.bits_[i];
  return out;
}

CubeSet CubeSet::unite(const CubeSet& other) const {
  check_compatible(other);
  CubeSet out = *this;
  for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] |= other.bits_[i];
  return out;
}

CubeSet CubeSet::complement() const {
  CubeSet out = full(n_, side_);
  for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] &= ~bits_[i];
  return out;
}

// ---------------------------------------------------------------------------

std::uint64_t pi1_cell(std::uint64_t index3, int n) {
  std::uint64_t cell = 0;
  for (int i = 0; i < n; ++i) {
    if (index3 % 3 == 1) cell |= 1ULL << i;
    index3 /= 3;
  }
  return cell;
}

std::uint64_t pi2_cell(std::uint64_t index3, int n) {
  std::uint64_t cell = 0;
  for (int i = 0; i < n; ++i) {
    if (index3 % 3 == 2) cell |= 1ULL << i;
    index3 /= 3;
  }
  return cell;
}

CubeSet pullback(const CubeSet& set) {
  if (set.side() == Side::full) return set;
  CubeSet out(set.dim(), Side::full);
  for (std::uint64_t x = 0; x < out.cells(); ++x) {
    if (set.contains_point(x)) out.set_cell(x);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lines

int LineTemplate::wildcard_count() const {
  return static_cast<int>(std::count(word.begin(), word.end(), kWildcard));
}

std::array<std::uint64_t, 3> LineTemplate::points() const {
  std::uint64_t base = 0, step = 0;
  for (std::uint8_t d : word) {
    base *= 3;
    step *= 3;
    if (d == kWildcard) {
      step += 1;
    } else {
      if (d > 2) throw InvalidArgument("template symbol outside {0,1,2,*}");
      base += d;
    }
  }
  if (step == 0) throw InvalidArgument("template has no wildcard");
  return {base, base + step, base + 2 * step};
}

std::string LineTemplate::to_string() const { return format_word(word); }

LineTemplate LineTemplate::from_base_step(std::uint64_t base, std::uint64_t step, int n) {
  LineTemplate t;
  t.word = point_digits(base, n);
  Word s = point_digits(step, n);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == 1) t.word[i] = kWildcard;
  }
  return t;
}

namespace {

void line_dfs(int n, int pos, std::uint64_t weight, std::uint64_t base, std::uint64_t step, bool& go,
              const std::function<bool(std::uint64_t, std::uint64_t)>& visit) {
  if (!go) return;
  if (pos == n) {
    if (step != 0) go = visit(base, step);
    return;
  }
  const std::uint64_t w = weight / 3;
  for (std::uint64_t d = 0; d < 3 && go; ++d) line_dfs(n, pos + 1, w, base + d * w, step, go, visit);
  if (go) line_dfs(n, pos + 1, w, base, step + w, go, visit);
}

}  // namespace

void for_each_line(int n, const std::function<bool(std::uint64_t, std::uint64_t)>& visit) {
  if (n < 0 || n > kMaxDim) throw InvalidArgument("dimension must lie in [0, 20]");
  bool go = true;
  line_dfs(n, 0, pow3(n), 0, 0, go, visit);
}

std::uint64_t line_count(int n) {
  std::uint64_t four = 1;
  for (int i = 0; i < n; ++i) four *= 4;
  return four - pow3(n);
}

std::vector<LineTemplate> enumerate_lines(int n) {
  if (n > 12) throw InvalidArgument("materializing lines requires n <= 12");
  std::vector<LineTemplate> out;
  out.reserve(line_count(n));
  for_each_line(n, [&](std::uint64_t base, std::uint64_t step) {
    out.push_back(LineTemplate::from_base_step(base, step, n));
    return true;
  });
  return out;
}

LineSearch lines_in_set(const CubeSet& set, std::size_t max_witnesses) {
  const CubeSet full = pullback(set);
  LineSearch result;
  for_each_line(full.dim(), [&](std::uint64_t base, std::uint64_t step) {
    if (full.has_cell(base) && full.has_cell(base + step) && full.has_cell(base + 2 * step)) {
      ++result.count;
      if (result.witnesses.size() < max_witnesses) {
        result.witnesses.push_back(LineTemplate::from_base_step(base, step, full.dim()));
      }
    }
    return true;
  });
  return result;
}

std::optional<LineTemplate> find_line(const CubeSet& set) {
  const CubeSet full = pullback(set);
  std::optional<LineTemplate> found;
  for_each_line(full.dim(), [&](std::uint64_t base, std::uint64_t step) {
    if (full.has_cell(base) && full.has_cell(base + step) && full.has_cell(base + 2 * step)) {
      found = LineTemplate::from_base_step(base, step, full.dim());
      return false;
    }
    return true;
  });
  return found;
}

bool is_line_free(const CubeSet& set) { return !find_line(set).has_value(); }

bool is_line(std::uint64_t a, std::uint64_t b, std::uint64_t c, int n) {
  const std::uint64_t limit = pow3(n);
  if (a >= limit || b >= limit || c >= limit) return false;
  const Word x = point_digits(a, n), y = point_digits(b, n), z = point_digits(c, n);
  bool moving = false;
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (x[k] == y[k] && y[k] == z[k]) continue;
    if (x[k] == 0 && y[k] == 1 && z[k] == 2) {
      moving = true;
      continue;
    }
    return false;
  }
  return moving;
}

CubeSet disjoint_product(const CubeSet& e1, const CubeSet& e2) {
  if (e1.side() != Side::zero_one) throw InvalidArgument("E1 must be a zero-one set");
  if (e2.side() != Side::zero_two) throw InvalidArgument("E2 must be a zero-two set");
  if (e1.dim() != e2.dim()) throw InvalidArgument("E1 and E2 dimensions differ");
  const int n = e1.dim();
  CubeSet out(n, Side::full);
  // odometer over x, tracking pi1 and pi2 cells incrementally
  Word digits(static_cast<std::size_t>(n), 0);
  std::uint64_t c1 = 0, c2 = 0;
  for (std::uint64_t x = 0; x < out.cells(); ++x) {
    if (e1.has_cell(c1) && e2.has_cell(c2)) out.set_cell(x);
    for (int i = n - 1; i >= 0; --i) {
      const auto k = static_cast<std::size_t>(i);
      const std::uint64_t bit = 1ULL << (n - 1 - i);
      if (digits[k] == 0) {
        digits[k] = 1;
        c1 |= bit;
        break;
      }
      if (digits[k] == 1) {
        digits[k] = 2;
        c1 &= ~bit;
        c2 |= bit;
        break;
      }
      digits[k] = 0;
      c2 &= ~bit;
    }
  }
  return out;
}

CoordLaw uniform_law() { return {Rational(1, 3), Rational(1, 3), Rational(1, 3)}; }

namespace {

void check_laws(std::span<const CoordLaw> laws, int n) {
  if (laws.size() != 1 && laws.size() != static_cast<std::size_t>(n)) {
    throw InvalidArgument("expected one law or one law per coordinate");
  }
  for (const auto& law : laws) {
    if (law[0] < 0 || law[1] < 0 || law[2] < 0 || law[0] + law[1] + law[2] != 1) {
      throw InvalidArgument("coordinate law must be nonnegative and sum to 1");
    }
  }
}

}  // namespace

Rational measure(const CubeSet& set, std::span<const CoordLaw> laws) {
  const int n = set.dim();
  check_laws(laws, n);
  const bool one_sided = set.side() != Side::full;
  const std::uint8_t sym = set.side_symbol();

  if (laws.size() == 1 || n == 0) {
    // group members by digit counts; only the counts enter the product weight
    const CoordLaw law = laws.empty() ? uniform_law() : laws[0];
    std::map<std::pair<int, int>, std::uint64_t> counts;  // (#1, #2) -> members
    for (std::uint64_t c = 0; c < set.cells(); ++c) {
      if (!set.has_cell(c)) continue;
      if (one_sided) {
        const int ones = std::popcount(c);
        counts[{ones, 0}] += 1;
      } else {
        int c1 = 0, c2 = 0;
        std::uint64_t x = c;
        for (int i = 0; i < n; ++i) {
          const auto d = x % 3;
          c1 += d == 1;
          c2 += d == 2;
          x /= 3;
        }
        counts[{c1, c2}] += 1;
      }
    }
    Rational total = 0;
    const Rational other = one_sided ? law[0] + law[3 - sym] : Rational(0);
    for (const auto& [key, count] : counts) {
      Rational term;
      if (one_sided) {
        term = pow(law[sym], static_cast<unsigned long>(key.first)) *
               pow(other, static_cast<unsigned long>(n - key.first));
      } else {
        term = pow(law[1], static_cast<unsigned long>(key.first)) *
               pow(law[2], static_cast<unsigned long>(key.second)) *
               pow(law[0], static_cast<unsigned long>(n - key.first - key.second));
      }
      total += term * Rational(BigInt(std::to_string(count)));
    }
    return total;
  }

  // per-coordinate laws: contract the membership tensor from the last coordinate
  std::vector<Rational> values(set.cells());
  for (std::uint64_t c = 0; c < set.cells(); ++c) values[c] = set.has_cell(c) ? 1 : 0;
  const std::uint64_t radix = one_sided ? 2 : 3;
  for (int i = n - 1; i >= 0; --i) {
    const CoordLaw& law = laws[static_cast<std::size_t>(i)];
    std::vector<Rational> next(values.size() / radix);
    for (std::size_t j = 0; j < next.size(); ++j) {
      if (one_sided) {
        next[j] = values[2 * j] * (law[0] + law[3 - sym]) + values[2 * j + 1] * law[sym];
      } else {
        next[j] = values[3 * j] * law[0] + values[3 * j + 1] * law[1] + values[3 * j + 2] * law[2];
      }
    }
    values.swap(next);
  }
  return values[0];
}

Rational uniform_measure(const CubeSet& set) {
  const int n = set.dim();
  const std::uint64_t denom = pow3(n);
  if (set.side() == Side::full) {
    Rational q(BigInt(std::to_string(set.size())), BigInt(std::to_string(denom)));
    q.canonicalize();
    return q;
  }
  // each cell with k nonzero digits pulls back to 2^(n-k) points
  std::uint64_t points = 0;
  for (std::uint64_t c = 0; c < set.cells(); ++c) {
    if (set.has_cell(c)) points += 1ULL << (n - std::popcount(c));
  }
  Rational q(BigInt(std::to_string(points)), BigInt(std::to_string(denom)));
  q.canonicalize();
  return q;
}

}  // namespace dhjlab
