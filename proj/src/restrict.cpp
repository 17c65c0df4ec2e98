#include "dhjlab/restrict.hpp"

#include "dhjlab/errors.hpp"
#include "dhjlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace dhjlab {

std::vector<int> Restriction::survivors() const {
  std::vector<int> out;
  std::size_t k = 0;
  for (int c = 0; c < n; ++c) {
    if (k < I.size() && I[k] == c) {
      ++k;
    } else {
      out.push_back(c);
    }
  }
  return out;
}

Restriction make_restriction(int n, std::vector<int> I, Word z) {
  if (n < 0 || n > kMaxDim) throw InvalidArgument("dimension out of range");
  if (I.size() != z.size()) throw InvalidArgument("z must assign exactly the coordinates of I");
  std::vector<std::size_t> order(I.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return I[a] < I[b]; });
  Restriction r;
  r.n = n;
  for (auto i : order) {
    if (I[i] < 0 || I[i] >= n) throw InvalidArgument("restricted coordinate out of range");
    if (!r.I.empty() && r.I.back() == I[i]) throw InvalidArgument("repeated restricted coordinate");
    if (z[i] > 2) throw InvalidArgument("restriction symbol outside {0,1,2}");
    r.I.push_back(I[i]);
    r.z.push_back(z[i]);
  }
  return r;
}

Restriction restriction_for_side(const Restriction& r, Side side) {
  Restriction out = r;
  if (side == Side::zero_one) out.z = pi1(r.z);
  if (side == Side::zero_two) out.z = pi2(r.z);
  return out;
}

namespace {

// place value of coordinate c and the digit a symbol contributes
struct Layout {
  int n;
  Side side;
  std::uint8_t symbol;
  std::uint64_t place(int c) const {
    const int e = n - 1 - c;
    return side == Side::full ? pow3(e) : (1ULL << e);
  }
  std::uint64_t digit(std::uint8_t s) const {
    if (side == Side::full) return s;
    if (s != 0 && s != symbol) throw InvalidArgument("symbol outside the set's alphabet");
    return s == 0 ? 0 : 1;
  }
  std::uint64_t radix() const { return side == Side::full ? 3 : 2; }
};

// Visits every output cell in order with the matching source cell.
template <class Visit>
void walk(int out_n, std::uint64_t radix, std::uint64_t base, const std::vector<std::uint64_t>& weights, Visit&& visit) {
  std::vector<std::uint64_t> digits(out_n, 0);
  std::uint64_t src = base;
  std::uint64_t cell = 0;
  while (true) {
    visit(cell, src);
    ++cell;
    int k = out_n - 1;
    while (k >= 0 && digits[k] + 1 == radix) {
      src -= digits[k] * weights[k];
      digits[k] = 0;
      --k;
    }
    if (k < 0) return;
    ++digits[k];
    src += weights[k];
  }
}

}  // namespace

CubeSet restrict_set(const CubeSet& set, const Restriction& r) {
  if (r.n != set.dim()) throw InvalidArgument("restriction dimension differs from the set");
  const Layout layout{set.dim(), set.side(), set.side_symbol()};
  std::uint64_t base = 0;
  for (std::size_t k = 0; k < r.I.size(); ++k) base += layout.digit(r.z[k]) * layout.place(r.I[k]);
  const auto surv = r.survivors();
  std::vector<std::uint64_t> weights;
  for (int c : surv) weights.push_back(layout.place(c));
  CubeSet out(static_cast<int>(surv.size()), set.side());
  walk(static_cast<int>(surv.size()), layout.radix(), base, weights, [&](std::uint64_t cell, std::uint64_t src) {
    if (set.has_cell(src)) out.set_cell(cell);
  });
  return out;
}

Restriction sample_restriction(int n, const Rational& delta, const CoordLaw& law, std::uint64_t seed) {
  if (delta <= 0 || delta > 1) throw InvalidArgument("delta must lie in (0, 1]");
  Rng rng(seed);
  const double keep = to_double(delta);
  const double weights[3] = {to_double(law[0]), to_double(law[1]), to_double(law[2])};
  Restriction r;
  r.n = n;
  r.delta = delta;
  r.seed = seed;
  r.source = "coordinate-law";
  for (int c = 0; c < n; ++c) {
    // draw the membership first so the stream layout does not depend on the law
    const bool fixed = delta != 1 && rng.uniform() >= keep;
    const auto sym = static_cast<std::uint8_t>(rng.pick(weights));
    if (fixed) {
      r.I.push_back(c);
      r.z.push_back(sym);
    }
  }
  return r;
}

std::vector<int> collapse_map(int n, const CollapseSpec& spec) {
  std::vector<int> rep(n);
  for (int c = 0; c < n; ++c) rep[c] = c;
  std::vector<bool> used(n, false);
  for (const auto& block : spec.blocks) {
    if (block.empty()) throw InvalidArgument("empty collapse block");
    const int lo = *std::min_element(block.begin(), block.end());
    for (int c : block) {
      if (c < 0 || c >= n) throw InvalidArgument("collapse block coordinate out of range");
      if (used[c]) throw InvalidArgument("collapse blocks overlap");
      used[c] = true;
      rep[c] = lo;
    }
  }
  std::vector<int> position(n, -1);
  int next = 0;
  for (int c = 0; c < n; ++c) {
    if (rep[c] == c) position[c] = next++;
  }
  std::vector<int> out(n);
  for (int c = 0; c < n; ++c) out[c] = position[rep[c]];
  return out;
}

int collapsed_dim(int n, const CollapseSpec& spec) {
  const auto map = collapse_map(n, spec);
  return map.empty() ? 0 : *std::max_element(map.begin(), map.end()) + 1;
}

CubeSet collapse_eq(const CubeSet& set, const CollapseSpec& spec) {
  const int n = set.dim();
  const auto map = collapse_map(n, spec);
  const int m = n == 0 ? 0 : *std::max_element(map.begin(), map.end()) + 1;
  const Layout layout{n, set.side(), set.side_symbol()};
  std::vector<std::uint64_t> weights(m, 0);
  for (int c = 0; c < n; ++c) weights[map[c]] += layout.place(c);
  CubeSet out(m, set.side());
  walk(m, layout.radix(), 0, weights, [&](std::uint64_t cell, std::uint64_t src) {
    if (set.has_cell(src)) out.set_cell(cell);
  });
  return out;
}

namespace {

struct CountClass {
  int c0, c1, c2;
};

std::vector<CountClass> count_classes(int s) {
  std::vector<CountClass> out;
  for (int a = 0; a <= s; ++a) {
    for (int b = 0; a + b <= s; ++b) out.push_back({a, b, s - a - b});
  }
  return out;
}

BigInt multinomial(int a, int b, int c) { return binomial(a + b + c, a) * binomial(b + c, b); }

}  // namespace

TvReport tv_of_collapse(int n, const std::vector<int>& s_coords, int k, std::uint64_t trials, std::uint64_t seed) {
  std::vector<int> coords = s_coords;
  std::sort(coords.begin(), coords.end());
  if (std::adjacent_find(coords.begin(), coords.end()) != coords.end()) throw InvalidArgument("repeated coordinate");
  for (int c : coords) {
    if (c < 0 || c >= n) throw InvalidArgument("coordinate out of range");
  }
  const int s = static_cast<int>(coords.size());
  if (k < 1 || k > s) throw InvalidArgument("need 1 <= k <= |S|");

  // P(word with counts c) = 3^-(s-k+1) * sum_a C(c_a, k) / C(s, k)
  const BigInt subsets = binomial(s, k);
  Rational collapse_scale(1);
  for (int i = 0; i < s - k + 1; ++i) collapse_scale /= 3;
  collapse_scale /= Rational(subsets);
  Rational uniform_word(1);
  for (int i = 0; i < s; ++i) uniform_word /= 3;

  TvReport report;
  Rational total = 0;
  std::map<std::tuple<int, int, int>, Rational> collapse_law;
  for (const auto& cls : count_classes(s)) {
    const BigInt hits = binomial(cls.c0, k) + binomial(cls.c1, k) + binomial(cls.c2, k);
    const Rational word = collapse_scale * Rational(hits);
    const Rational diff = word - uniform_word;
    total += Rational(multinomial(cls.c0, cls.c1, cls.c2)) * abs(diff);
    collapse_law[{cls.c0, cls.c1, cls.c2}] = Rational(multinomial(cls.c0, cls.c1, cls.c2)) * word;
  }
  report.exact = total / 2;
  report.bound = 10.0 * k / std::sqrt(static_cast<double>(s));
  report.within_bound = to_double(report.exact) <= report.bound;

  if (trials > 0) {
    // empirical count-class histogram of v against the exact uniform class law
    Rng rng(seed);
    std::map<std::tuple<int, int, int>, std::uint64_t> hist;
    for (std::uint64_t t = 0; t < trials; ++t) {
      int counts[3] = {0, 0, 0};
      counts[rng.below(3)] += k;
      for (int i = k; i < s; ++i) ++counts[rng.below(3)];
      ++hist[{counts[0], counts[1], counts[2]}];
    }
    double est = 0;
    for (const auto& cls : count_classes(s)) {
      const auto key = std::make_tuple(cls.c0, cls.c1, cls.c2);
      const double uniform = to_double(Rational(multinomial(cls.c0, cls.c1, cls.c2)) * uniform_word);
      const auto it = hist.find(key);
      const double emp = it == hist.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(trials);
      est += std::abs(emp - uniform);
    }
    report.sampled = est / 2;
    report.trials = trials;
  }
  return report;
}

Embedding Embedding::identity(int n) {
  Embedding e;
  e.target_.resize(n);
  for (int c = 0; c < n; ++c) e.target_[c] = c;
  e.current_n_ = n;
  return e;
}

std::optional<int> Embedding::target(int c) const {
  if (target_[c] >= 0) return target_[c];
  return std::nullopt;
}

std::optional<std::uint8_t> Embedding::fixed_symbol(int c) const {
  if (target_[c] < 0) return static_cast<std::uint8_t>(-1 - target_[c]);
  return std::nullopt;
}

Embedding Embedding::after_restriction(const Restriction& r) const {
  if (r.n != current_n_) throw InvalidArgument("restriction dimension differs from the embedding");
  std::vector<int> fixed(current_n_, -1);
  for (std::size_t k = 0; k < r.I.size(); ++k) fixed[r.I[k]] = r.z[k];
  std::vector<int> renumber(current_n_, -1);
  int next = 0;
  for (int c = 0; c < current_n_; ++c) {
    if (fixed[c] < 0) renumber[c] = next++;
  }
  Embedding out = *this;
  for (auto& t : out.target_) {
    if (t < 0) continue;
    t = fixed[t] >= 0 ? -1 - fixed[t] : renumber[t];
  }
  out.current_n_ = next;
  return out;
}

Embedding Embedding::after_collapse(const CollapseSpec& spec) const {
  const auto map = collapse_map(current_n_, spec);
  Embedding out = *this;
  for (auto& t : out.target_) {
    if (t >= 0) t = map[t];
  }
  out.current_n_ = collapsed_dim(current_n_, spec);
  return out;
}

Word Embedding::lift_point(std::span<const std::uint8_t> x) const {
  if (static_cast<int>(x.size()) != current_n_) throw InvalidArgument("point dimension differs from the embedding");
  Word out(target_.size());
  for (std::size_t c = 0; c < target_.size(); ++c) {
    out[c] = target_[c] >= 0 ? x[target_[c]] : static_cast<std::uint8_t>(-1 - target_[c]);
  }
  return out;
}

LineTemplate Embedding::lift_line(const LineTemplate& line) const {
  if (line.dim() != current_n_) throw InvalidArgument("line dimension differs from the embedding");
  LineTemplate out;
  out.word.resize(target_.size());
  for (std::size_t c = 0; c < target_.size(); ++c) {
    out.word[c] = target_[c] >= 0 ? line.word[target_[c]] : static_cast<std::uint8_t>(-1 - target_[c]);
  }
  return out;
}

}  // namespace dhjlab
