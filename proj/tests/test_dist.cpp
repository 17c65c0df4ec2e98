#include "dhjlab/dist.hpp"
#include "dhjlab/errors.hpp"
#include "dhjlab/verify.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <map>

using namespace dhjlab;

namespace {

Rational total(const JointDist& d) {
  Rational s = 0;
  for (const auto& r : d.rows()) s += r.p;
  return s;
}

std::vector<Word> rows_of(const nlohmann::json& j) {
  std::vector<Word> out;
  for (const auto& r : j) {
    Word w;
    for (int v : r) w.push_back(static_cast<std::uint8_t>(v));
    out.push_back(w);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Law of (y(i), y(j)) on one coordinate by summing over every flip path.
std::map<Word, Rational> chain_oracle(unsigned K, const Rational& p, unsigned i, unsigned j) {
  std::map<Word, Rational> out;
  for (std::uint8_t start = 0; start < 3; ++start) {
    // paths: a flip happens at step s (1..K) or never
    for (unsigned s = 1; s <= K + 1; ++s) {
      Rational w(1, 3);
      if (start != 1 && s != K + 1) continue;
      if (start == 1) {
        for (unsigned t = 1; t < s && t <= K; ++t) w *= 1 - p;
        if (s <= K) w *= p;
      }
      auto at = [&](unsigned step) -> std::uint8_t {
        if (start != 1) return start;
        return step >= s ? 2 : 1;
      };
      out[Word{at(i), at(j)}] += w;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("line distribution") {
  const JointDist d = atom_distribution();
  CHECK(d.rows().size() == 4);
  CHECK(total(d) == 1);
  CHECK(d.prob(Word{0, 1, 2}) == Rational(1, 6));
  CHECK(d.prob(Word{1, 1, 1}) == Rational(1, 3));
  CHECK_THROWS_AS(dhj_distribution(Rational(1, 2), Rational(1, 2), Rational(0), Rational(0)), InvalidArgument);
}

TEST_CASE("tv distance examples") {
  const JointDist d = atom_distribution();
  CHECK(tv_distance(d, d) == 0);
  const Alphabet a{0, 1, 2};
  CHECK(tv_distance(point_mass({a}, Word{0}), point_mass({a}, Word{1})) == 1);
  const Word u[] = {Word{0}, Word{1}, Word{2}};
  const JointDist uni = uniform_on({a}, u);
  const JointDist skew({a}, {{Word{0}, Rational(1, 2)}, {Word{1}, Rational(1, 4)}, {Word{2}, Rational(1, 4)}});
  CHECK(tv_distance(uni, skew) == Rational(1, 6));
}

TEST_CASE("marginal and condition") {
  const JointDist d = atom_distribution();
  const std::size_t yz[] = {1, 2};
  const JointDist m = marginal(d, yz);
  CHECK(m.prob(Word{1, 2}) == Rational(1, 6));
  CHECK(total(m) == 1);
  const std::size_t x[] = {0};
  const std::uint8_t zero[] = {0};
  const JointDist c = condition(d, x, zero);
  CHECK(c.prob(Word{0, 0}) == Rational(1, 2));
  CHECK(c.prob(Word{1, 2}) == Rational(1, 2));
  const JointDist nowhere({{0, 1}, {0, 1}}, {{Word{0, 0}, Rational(1)}});
  const std::size_t c0[] = {0};
  const std::uint8_t one[] = {1};
  CHECK_THROWS_AS(condition(nowhere, c0, one), EmptyCondition);
}

TEST_CASE("cs_duplicate matches the defining product formula") {
  const std::vector<JointDist> inputs = {atom_distribution(),
                                         dhj_distribution(Rational(1, 10), Rational(2, 5), Rational(1, 5), Rational(3, 10))};
  for (const auto& d : inputs) {
    for (std::size_t k = 0; k < 3; ++k) {
      const std::size_t keep[] = {k};
      const JointDist dup = cs_duplicate(d, keep);
      CHECK(dup.arity() == 5);
      CHECK(total(dup) == 1);
      std::vector<std::size_t> orig = {0, 1, 2};
      CHECK(marginal(dup, orig) == d);
      // second copy: the kept coordinate with the fresh coordinates in their original positions
      std::vector<std::size_t> copy(3);
      std::size_t fresh = 3;
      for (std::size_t i = 0; i < 3; ++i) copy[i] = i == k ? k : fresh++;
      CHECK(marginal(dup, copy) == d);
      const std::size_t kc[] = {k};
      const JointDist mk = marginal(d, kc);
      for (const auto& row : dup.rows()) {
        Word a(3), b(3);
        for (std::size_t i = 0; i < 3; ++i) {
          a[i] = row.t[i];
          b[i] = row.t[copy[i]];
        }
        const Word w{row.t[k]};
        CHECK(row.p == d.prob(a) * d.prob(b) / mk.prob(w));
      }
    }
  }
}

TEST_CASE("tables reproduce the transcribed supports") {
  const auto tables = load_reference_tables();
  const JointDist m1 = build_mu1(atom_distribution());
  const JointDist m2 = build_mu2(m1);
  const JointDist m3 = build_mu3(m2);
  CHECK(m1.support().size() == 6);
  CHECK(m2.support().size() == 8);
  CHECK(m3.support().size() == 10);
  auto sorted = [](std::vector<Word> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  CHECK(sorted(m1.support()) == rows_of(tables["mu1"]["rows"]));
  CHECK(sorted(m2.support()) == rows_of(tables["mu2"]["rows"]));
  CHECK(sorted(m3.support()) == rows_of(tables["mu3"]["rows"]));
  CHECK(total(m1) == 1);
  CHECK(total(m2) == 1);
  CHECK(total(m3) == 1);
  // (1,1,0,0,1,1,1,2) in mu2 comes from mu1 rows (0,1,0,1,2) and (1,1,1,1,1) sharing y = y' = 1
  CHECK(m2.prob(Word{1, 1, 0, 0, 1, 1, 1, 2}) > 0);
}

TEST_CASE("mu2 single-coordinate marginals equal the x law") {
  const JointDist m2 = build_mu2(build_mu1(atom_distribution()));
  const std::size_t x[] = {0};
  const JointDist mx = marginal(atom_distribution(), x);
  for (std::size_t c = 0; c < 4; ++c) {
    const std::size_t cc[] = {c};
    CHECK(marginal(m2, cc) == mx);
  }
}

TEST_CASE("mu4 carries the six listed tuples") {
  const JointDist m4 = build_mu4(build_mu3(build_mu2(build_mu1(atom_distribution()))));
  CHECK(total(m4) == 1);
  for (const Word& t : {Word{0, 0, 0, 0}, Word{1, 1, 1, 1}, Word{0, 1, 0, 1}, Word{1, 0, 1, 0}, Word{0, 0, 1, 1},
                        Word{1, 1, 0, 0}}) {
    CHECK(m4.prob(t) > 0);
  }
}

TEST_CASE("decompose round trip") {
  const JointDist d = atom_distribution();
  const Word diag[] = {Word{0, 0, 0}, Word{1, 1, 1}, Word{2, 2, 2}};
  const JointDist comp = uniform_on(d.alphabets(), diag);
  const auto dec = decompose(d, comp);
  CHECK(dec.beta == Rational(1, 2));
  REQUIRE(dec.residual.has_value());
  CHECK(mixture(dec.beta, comp, *dec.residual) == d);
  CHECK(decompose(d, d).beta == 1);
  CHECK_FALSE(decompose(d, d).residual.has_value());

  const JointDist m2 = build_mu2(build_mu1(atom_distribution()));
  const std::size_t xs[] = {0, 1, 2, 3};
  const JointDist mx = marginal(m2, xs);
  const Word atoms[] = {Word{0, 0, 0, 0}, Word{0, 2, 0, 2}, Word{0, 0, 1, 1}};
  const JointDist nu = uniform_on(mx.alphabets(), atoms);
  const auto d2 = decompose(mx, nu);
  CHECK(d2.beta > 0);
  REQUIRE(d2.residual.has_value());
  CHECK(mixture(d2.beta, nu, *d2.residual) == mx);
}

TEST_CASE("enumerate_Q") {
  const Alphabet bin{0, 1};
  CHECK(enumerate_Q(bin, BigInt(2)).size() == 1);
  const auto three = enumerate_Q(bin, BigInt(3));
  CHECK(three.size() == 3);
  for (const auto& q : three) CHECK(total(q) == 1);
  CHECK_THROWS_AS(enumerate_Q(bin, BigInt(1) << 1000), InvalidArgument);
}

TEST_CASE("chain laws match path enumeration") {
  const auto prm = ChainParams::make(4, Rational(1, 4000), Rational(1, 10), 16, Rational(1, 7));
  const JointDist nu0 = chain_marginal(prm, 0);
  for (std::uint8_t s = 0; s < 3; ++s) CHECK(nu0.prob(Word{s}) == Rational(1, 3));
  for (unsigned i = 0; i <= 4; ++i) {
    for (unsigned j = i + 1; j <= 4; ++j) {
      const auto expect = chain_oracle(4, prm.p, i, j);
      const JointDist xi = chain_pair(prm, i, j);
      for (const auto& [t, p] : expect) CHECK(xi.prob(t) == p);
      CHECK(xi.rows().size() == expect.size());
      const std::size_t first[] = {0}, second[] = {1};
      CHECK(marginal(xi, first) == chain_marginal(prm, i));
      CHECK(marginal(xi, second) == chain_marginal(prm, j));
    }
  }
  CHECK(chain_pair(prm, 0, 1).prob(Word{1, 2}) == prm.p / 3);
  CHECK_THROWS_AS(chain_pair(prm, 2, 2), InvalidArgument);
  CHECK_THROWS_AS(ChainParams::make(4, Rational(1, 100), Rational(1, 10), 16, Rational(1, 7)), InvalidArgument);
}

TEST_CASE("rounded flip probability stays below eta'/sqrt(n)") {
  for (unsigned long n : {2ul, 3ul, 10ul, 1000ul}) {
    const auto prm = ChainParams::rounded(4, Rational(1, 4000), Rational(1, 10), n);
    // p <= eta'/sqrt(n)  <=>  p^2 n <= eta'^2
    CHECK(prm.p * prm.p * Rational(n) <= prm.eta_prime * prm.eta_prime);
    CHECK(prm.p > 0);
  }
}

TEST_CASE("lift of a pair law to the line atoms") {
  const auto prm = ChainParams::make(4, Rational(1, 4000), Rational(1, 10), 16, Rational(1, 7));
  const JointDist xi = chain_pair(prm, 0, 1);
  const JointDist line = lift_pair_to_line(xi);
  const std::size_t yz[] = {1, 2};
  CHECK(marginal(line, yz) == xi);
  CHECK(line.prob(Word{0, 1, 2}) == prm.p / 3);
  const JointDist bad({{0, 1, 2}, {0, 1, 2}}, {{Word{2, 1}, Rational(1)}});
  CHECK_THROWS_AS(lift_pair_to_line(bad), InvalidArgument);
}

TEST_CASE("project_symbols") {
  const Projection pr[] = {{1, SymbolMap::pi1}, {1, SymbolMap::pi2}, {2, SymbolMap::pi1}, {2, SymbolMap::pi2}};
  const JointDist p = project_symbols(atom_distribution(), pr);
  CHECK(p.support().size() == 4);
  CHECK(p.prob(Word{1, 0, 0, 2}) == Rational(1, 6));
  CHECK(total(p) == 1);
}
