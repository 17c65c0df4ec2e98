#include "dhjlab/dist.hpp"

#include "dhjlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <map>
#include <set>

namespace dhjlab {

namespace {

bool in_alphabet(const Alphabet& a, std::uint8_t s) { return std::find(a.begin(), a.end(), s) != a.end(); }

std::vector<std::string> default_names(std::size_t k) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < k; ++i) names.push_back("c" + std::to_string(i));
  return names;
}

std::vector<DistRow> sorted_rows(std::map<Word, Rational> table) {
  std::vector<DistRow> rows;
  rows.reserve(table.size());
  for (auto& [t, p] : table) {
    if (p != 0) rows.push_back({t, p});
  }
  return rows;
}

}  // namespace

JointDist::JointDist(std::vector<Alphabet> alphabets, std::vector<DistRow> rows, std::vector<std::string> names)
    : alphabets_(std::move(alphabets)), rows_(std::move(rows)), names_(std::move(names)) {
  if (alphabets_.empty()) throw InvalidArgument("distribution needs at least one coordinate");
  for (auto& a : alphabets_) {
    if (a.empty()) throw InvalidArgument("empty alphabet");
    std::sort(a.begin(), a.end());
    if (std::adjacent_find(a.begin(), a.end()) != a.end()) throw InvalidArgument("repeated alphabet symbol");
    for (auto s : a) {
      if (s > 2) throw InvalidArgument("alphabet symbols must lie in {0,1,2}");
    }
  }
  if (names_.empty()) names_ = default_names(alphabets_.size());
  if (names_.size() != alphabets_.size()) throw InvalidArgument("one name per coordinate required");
  if (rows_.empty()) throw InvalidArgument("distribution has no rows");
  Rational total = 0;
  for (const auto& row : rows_) {
    if (row.t.size() != alphabets_.size()) throw InvalidArgument("tuple arity mismatch");
    for (std::size_t i = 0; i < row.t.size(); ++i) {
      if (!in_alphabet(alphabets_[i], row.t[i])) throw InvalidArgument("tuple entry outside its alphabet");
    }
    if (row.p <= 0) throw InvalidArgument("row probabilities must be positive");
    total += row.p;
  }
  if (total != 1) throw InvalidArgument("probabilities sum to " + to_string(total) + ", not 1");
  std::sort(rows_.begin(), rows_.end(), [](const DistRow& a, const DistRow& b) { return a.t < b.t; });
  for (std::size_t i = 1; i < rows_.size(); ++i) {
    if (rows_[i].t == rows_[i - 1].t) throw InvalidArgument("repeated tuple " + format_word(rows_[i].t));
  }
}

JointDist JointDist::merged(std::vector<Alphabet> alphabets, std::vector<DistRow> rows, std::vector<std::string> names) {
  std::map<Word, Rational> table;
  for (auto& row : rows) table[row.t] += row.p;
  return JointDist(std::move(alphabets), sorted_rows(std::move(table)), std::move(names));
}

std::size_t JointDist::coord(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  throw InvalidArgument("no coordinate named " + std::string(name));
}

Rational JointDist::prob(std::span<const std::uint8_t> tuple) const {
  const Word key(tuple.begin(), tuple.end());
  auto it = std::lower_bound(rows_.begin(), rows_.end(), key, [](const DistRow& r, const Word& k) { return r.t < k; });
  if (it != rows_.end() && it->t == key) return it->p;
  return 0;
}

std::vector<Word> JointDist::support() const {
  std::vector<Word> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.push_back(r.t);
  return out;
}

JointDist JointDist::renamed(std::vector<std::string> names) const {
  JointDist out = *this;
  if (names.size() != arity()) throw InvalidArgument("one name per coordinate required");
  out.names_ = std::move(names);
  return out;
}

JointDist dhj_distribution(const Rational& w000, const Rational& w111, const Rational& w222, const Rational& w012) {
  for (const auto* w : {&w000, &w111, &w222, &w012}) {
    if (*w <= 0) throw InvalidArgument("line atom weights must be positive");
  }
  if (w000 + w111 + w222 + w012 != 1) throw InvalidArgument("line atom weights must sum to 1");
  const Alphabet full{0, 1, 2};
  return JointDist({full, full, full},
                   {{{0, 0, 0}, w000}, {{1, 1, 1}, w111}, {{2, 2, 2}, w222}, {{0, 1, 2}, w012}},
                   {"x", "y", "z"});
}

JointDist atom_distribution() {
  return dhj_distribution(Rational(1, 6), Rational(1, 3), Rational(1, 3), Rational(1, 6));
}

JointDist point_mass(std::vector<Alphabet> alphabets, Word tuple) {
  return JointDist(std::move(alphabets), {{std::move(tuple), Rational(1)}});
}

JointDist uniform_on(std::vector<Alphabet> alphabets, std::span<const Word> tuples) {
  if (tuples.empty()) throw InvalidArgument("uniform law on an empty set");
  std::vector<DistRow> rows;
  const Rational w(1, static_cast<unsigned long>(tuples.size()));
  for (const auto& t : tuples) rows.push_back({t, w});
  return JointDist(std::move(alphabets), std::move(rows));
}

JointDist law_dist(const CoordLaw& law) {
  std::vector<DistRow> rows;
  for (std::uint8_t s = 0; s < 3; ++s) {
    if (law[s] != 0) rows.push_back({{s}, law[s]});
  }
  return JointDist({{0, 1, 2}}, std::move(rows));
}

CoordLaw to_law(const JointDist& d) {
  if (d.arity() != 1) throw InvalidArgument("expected a single-coordinate law");
  CoordLaw law{Rational(0), Rational(0), Rational(0)};
  for (const auto& r : d.rows()) law[r.t[0]] = r.p;
  return law;
}

JointDist marginal(const JointDist& d, std::span<const std::size_t> coords) {
  if (coords.empty()) throw InvalidArgument("marginal needs at least one coordinate");
  std::vector<Alphabet> alphabets;
  std::vector<std::string> names;
  for (auto c : coords) {
    if (c >= d.arity()) throw InvalidArgument("coordinate out of range");
    alphabets.push_back(d.alphabets()[c]);
    names.push_back(d.names()[c]);
  }
  std::map<Word, Rational> table;
  for (const auto& row : d.rows()) {
    Word key;
    key.reserve(coords.size());
    for (auto c : coords) key.push_back(row.t[c]);
    table[key] += row.p;
  }
  return JointDist(std::move(alphabets), sorted_rows(std::move(table)), std::move(names));
}

JointDist condition(const JointDist& d, std::span<const std::size_t> coords, std::span<const std::uint8_t> values) {
  if (coords.size() != values.size()) throw InvalidArgument("one value per conditioned coordinate");
  std::vector<bool> fixed(d.arity(), false);
  for (auto c : coords) {
    if (c >= d.arity()) throw InvalidArgument("coordinate out of range");
    fixed[c] = true;
  }
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < d.arity(); ++i) {
    if (!fixed[i]) rest.push_back(i);
  }
  if (rest.empty()) throw InvalidArgument("conditioning on every coordinate leaves nothing");
  std::map<Word, Rational> table;
  Rational mass = 0;
  for (const auto& row : d.rows()) {
    bool match = true;
    for (std::size_t k = 0; k < coords.size() && match; ++k) match = row.t[coords[k]] == values[k];
    if (!match) continue;
    Word key;
    for (auto c : rest) key.push_back(row.t[c]);
    table[key] += row.p;
    mass += row.p;
  }
  if (mass == 0) throw EmptyCondition("conditioning event has zero mass");
  for (auto& [t, p] : table) p /= mass;
  std::vector<Alphabet> alphabets;
  std::vector<std::string> names;
  for (auto c : rest) {
    alphabets.push_back(d.alphabets()[c]);
    names.push_back(d.names()[c]);
  }
  return JointDist(std::move(alphabets), sorted_rows(std::move(table)), std::move(names));
}

JointDist cs_duplicate(const JointDist& d, std::span<const std::size_t> keep, std::vector<std::string> copy_names) {
  std::vector<bool> kept(d.arity(), false);
  for (auto c : keep) {
    if (c >= d.arity()) throw InvalidArgument("coordinate out of range");
    kept[c] = true;
  }
  std::vector<std::size_t> others;
  for (std::size_t i = 0; i < d.arity(); ++i) {
    if (!kept[i]) others.push_back(i);
  }
  if (keep.empty() || others.empty()) throw InvalidArgument("keep must be a proper nonempty subset");
  if (copy_names.empty()) {
    for (auto c : others) copy_names.push_back(d.names()[c] + "'");
  }
  if (copy_names.size() != others.size()) throw InvalidArgument("one name per duplicated coordinate required");

  // group rows by their kept part
  std::map<Word, std::vector<const DistRow*>> groups;
  std::map<Word, Rational> group_mass;
  for (const auto& row : d.rows()) {
    Word key;
    for (std::size_t i = 0; i < d.arity(); ++i) {
      if (kept[i]) key.push_back(row.t[i]);
    }
    groups[key].push_back(&row);
    group_mass[key] += row.p;
  }
  std::map<Word, Rational> table;
  for (const auto& [key, members] : groups) {
    const Rational& w = group_mass[key];
    for (const DistRow* a : members) {
      for (const DistRow* b : members) {
        Word t = a->t;
        for (auto c : others) t.push_back(b->t[c]);
        table[t] += a->p * b->p / w;
      }
    }
  }
  std::vector<Alphabet> alphabets = d.alphabets();
  std::vector<std::string> names = d.names();
  for (std::size_t k = 0; k < others.size(); ++k) {
    alphabets.push_back(d.alphabets()[others[k]]);
    names.push_back(copy_names[k]);
  }
  return JointDist(std::move(alphabets), sorted_rows(std::move(table)), std::move(names));
}

namespace {

std::uint8_t apply_map(SymbolMap m, std::uint8_t s) {
  switch (m) {
    case SymbolMap::pi1: return pi1(s);
    case SymbolMap::pi2: return pi2(s);
    default: return s;
  }
}

std::string map_prefix(SymbolMap m) {
  switch (m) {
    case SymbolMap::pi1: return "pi1 ";
    case SymbolMap::pi2: return "pi2 ";
    default: return "";
  }
}

}  // namespace

JointDist project_symbols(const JointDist& d, std::span<const Projection> projections) {
  if (projections.empty()) throw InvalidArgument("projection list is empty");
  std::vector<Alphabet> alphabets;
  std::vector<std::string> names;
  for (const auto& pr : projections) {
    if (pr.coord >= d.arity()) throw InvalidArgument("coordinate out of range");
    std::set<std::uint8_t> image;
    for (auto s : d.alphabets()[pr.coord]) image.insert(apply_map(pr.map, s));
    alphabets.emplace_back(image.begin(), image.end());
    names.push_back(map_prefix(pr.map) + d.names()[pr.coord]);
  }
  std::map<Word, Rational> table;
  for (const auto& row : d.rows()) {
    Word key;
    for (const auto& pr : projections) key.push_back(apply_map(pr.map, row.t[pr.coord]));
    table[key] += row.p;
  }
  return JointDist(std::move(alphabets), sorted_rows(std::move(table)), std::move(names));
}

Decomposition decompose(const JointDist& d, const JointDist& component) {
  if (d.alphabets() != component.alphabets()) throw InvalidArgument("alphabets differ");
  std::optional<Rational> beta;
  for (const auto& row : component.rows()) {
    const Rational mass = d.prob(row.t);
    if (mass == 0) throw InvalidArgument("component support is not contained in the support of D");
    const Rational ratio = mass / row.p;
    if (!beta || ratio < *beta) beta = ratio;
  }
  if (*beta >= 1) return {Rational(1), std::nullopt};
  std::vector<DistRow> rows;
  const Rational rest = 1 - *beta;
  for (const auto& row : d.rows()) {
    const Rational p = (row.p - *beta * component.prob(row.t)) / rest;
    if (p != 0) rows.push_back({row.t, p});
  }
  return {*beta, JointDist(d.alphabets(), std::move(rows), d.names())};
}

JointDist mixture(const Rational& beta, const JointDist& a, const JointDist& b) {
  if (a.alphabets() != b.alphabets()) throw InvalidArgument("alphabets differ");
  if (beta < 0 || beta > 1) throw InvalidArgument("mixture weight outside [0,1]");
  std::map<Word, Rational> table;
  for (const auto& r : a.rows()) table[r.t] += beta * r.p;
  for (const auto& r : b.rows()) table[r.t] += (1 - beta) * r.p;
  return JointDist(a.alphabets(), sorted_rows(std::move(table)), a.names());
}

Rational tv_distance(const JointDist& a, const JointDist& b) {
  if (a.alphabets() != b.alphabets()) throw InvalidArgument("alphabets differ");
  std::map<Word, Rational> diff;
  for (const auto& r : a.rows()) diff[r.t] += r.p;
  for (const auto& r : b.rows()) diff[r.t] -= r.p;
  Rational total = 0;
  for (const auto& [t, v] : diff) total += abs(v);
  return total / 2;
}

std::vector<JointDist> enumerate_Q(const Alphabet& alphabet, const BigInt& max_denominator) {
  if (alphabet.empty()) throw InvalidArgument("empty alphabet");
  if (max_denominator < 1) throw InvalidArgument("denominator cap must be positive");
  // reduced fractions in (0,1] with denominator <= cap
  if (max_denominator > kQEnumerationCap) {
    const double fractions = 3.0 * max_denominator.get_d() * max_denominator.get_d() / 9.8696;
    const double estimate = std::pow(fractions, static_cast<double>(alphabet.size() - 1));
    throw InvalidArgument("denominator cap exceeds " + std::to_string(kQEnumerationCap) +
                          "; about " + std::to_string(estimate) + " candidate laws");
  }
  const unsigned long cap = max_denominator.get_ui();
  std::vector<Rational> fractions;
  for (unsigned long den = 1; den <= cap; ++den) {
    for (unsigned long num = 1; num <= den; ++num) {
      if (std::gcd(num, den) == 1) fractions.emplace_back(num, den);
    }
  }
  std::sort(fractions.begin(), fractions.end());
  const std::size_t k = alphabet.size();
  std::vector<JointDist> out;
  std::vector<Rational> current;
  // depth-first over the first k-1 masses; the last is forced
  auto recurse = [&](auto&& self, const Rational& remaining) -> void {
    if (current.size() + 1 == k) {
      if (remaining > 0 && remaining.get_den() <= max_denominator) {
        std::vector<DistRow> rows;
        for (std::size_t i = 0; i + 1 < k; ++i) rows.push_back({{alphabet[i]}, current[i]});
        rows.push_back({{alphabet[k - 1]}, remaining});
        out.emplace_back(std::vector<Alphabet>{alphabet}, std::move(rows));
      }
      return;
    }
    for (const auto& f : fractions) {
      if (f >= remaining) break;
      current.push_back(f);
      self(self, remaining - f);
      current.pop_back();
    }
  };
  recurse(recurse, Rational(1));
  return out;
}

// ---------------------------------------------------------------------------

ChainParams ChainParams::make(unsigned K, Rational eta_prime, Rational eta, unsigned long n, Rational p) {
  if (K < 1) throw InvalidArgument("K must be at least 1");
  if (eta_prime <= 0 || eta <= 0) throw InvalidArgument("eta and eta' must be positive");
  if (n < 1) throw InvalidArgument("n must be positive");
  if (Rational(K) * eta_prime > eta / 100) throw InvalidArgument("chain parameters violate K*eta' <= eta/100");
  if (p <= 0 || p >= 1) throw InvalidArgument("flip probability must lie in (0,1)");
  return ChainParams{K, std::move(eta_prime), std::move(eta), n, std::move(p)};
}

ChainParams ChainParams::rounded(unsigned K, Rational eta_prime, Rational eta, unsigned long n, unsigned digits) {
  const Rational s = sqrt_upper(Rational(n), digits);
  Rational p = eta_prime / s;
  return make(K, std::move(eta_prime), std::move(eta), n, std::move(p));
}

JointDist chain_marginal(const ChainParams& params, unsigned i) {
  if (i > params.K) throw InvalidArgument("chain index exceeds K");
  const Rational third(1, 3);
  const Rational stay = pow(1 - params.p, i);
  CoordLaw law{third, third * stay, third + third * (1 - stay)};
  return law_dist(law);
}

JointDist chain_pair(const ChainParams& params, unsigned i, unsigned j) {
  if (i >= j) throw InvalidArgument("chain_pair requires i < j");
  if (j > params.K) throw InvalidArgument("chain index exceeds K");
  const Rational third(1, 3);
  const Rational q = 1 - params.p;
  const Rational stay_i = pow(q, i);
  const Rational stay_j = pow(q, j);
  const Rational stay_gap = pow(q, j - i);
  std::vector<DistRow> rows{
      {{0, 0}, third},
      {{1, 1}, third * stay_j},
      {{2, 2}, third + third * (1 - stay_i)},
      {{1, 2}, third * stay_i * (1 - stay_gap)},
  };
  return JointDist::merged({{0, 1, 2}, {0, 1, 2}}, std::move(rows), {"y", "z"});
}

JointDist lift_pair_to_line(const JointDist& xi) {
  if (xi.arity() != 2) throw InvalidArgument("expected a pair distribution");
  std::vector<DistRow> rows;
  for (const auto& r : xi.rows()) {
    const std::uint8_t y = r.t[0], z = r.t[1];
    if (y == z) {
      rows.push_back({{y, y, y}, r.p});
    } else if (y == 1 && z == 2) {
      rows.push_back({{0, 1, 2}, r.p});
    } else {
      throw InvalidArgument("pair (" + std::to_string(y) + "," + std::to_string(z) + ") is not a line projection");
    }
  }
  const Alphabet full{0, 1, 2};
  return JointDist({full, full, full}, std::move(rows), {"x", "y", "z"});
}

// ---------------------------------------------------------------------------

JointDist build_mu1(const JointDist& line) {
  if (line.arity() != 3) throw InvalidArgument("expected a distribution on (x, y, z)");
  const JointDist d = line.renamed({"x", "y", "z"});
  const std::size_t keep[] = {2};
  const JointDist dup = cs_duplicate(d, keep, {"x'", "y'"});
  const std::size_t order[] = {0, 1, 3, 4, 2};
  return marginal(dup, order);
}

JointDist build_mu2(const JointDist& mu1) {
  if (mu1.arity() != 5) throw InvalidArgument("expected mu1 on (x, y, x', y', z)");
  const JointDist d = mu1.renamed({"x", "y", "x'", "y'", "z"});
  const std::size_t keep[] = {1, 3};
  const JointDist dup = cs_duplicate(d, keep, {"x''", "x'''", "z'"});
  const std::size_t order[] = {0, 2, 5, 6, 1, 3, 4, 7};
  return marginal(dup, order);
}

JointDist build_mu3(const JointDist& mu2) {
  if (mu2.arity() != 8) throw InvalidArgument("expected mu2 on eight coordinates");
  const JointDist d = mu2.renamed({"x", "x'", "x''", "x'''", "y", "y'", "z", "z'"});
  const std::size_t keep[] = {0, 1, 2, 3};
  const JointDist dup = cs_duplicate(d, keep, {"y''", "y'''", "z''", "z'''"});
  const Projection pattern[] = {
      {4, SymbolMap::pi1},  {5, SymbolMap::pi1},  {8, SymbolMap::pi1},  {9, SymbolMap::pi1},
      {6, SymbolMap::pi2},  {7, SymbolMap::pi2},  {10, SymbolMap::pi2}, {11, SymbolMap::pi2},
  };
  return project_symbols(dup, pattern);
}

JointDist build_mu4(const JointDist& mu3) {
  if (mu3.arity() != 8) throw InvalidArgument("expected mu3 on eight coordinates");
  const JointDist d = mu3.renamed({"y", "y'", "y''", "y'''", "z", "z'", "z''", "z'''"});
  const std::size_t keep[] = {1, 3, 4, 5, 6, 7};
  const JointDist dup = cs_duplicate(d, keep, {"y~", "y~''"});
  const std::size_t order[] = {0, 2, 8, 9};
  return marginal(dup, order);
}

}  // namespace dhjlab
