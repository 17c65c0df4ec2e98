#include "dhjlab/errors.hpp"
#include "dhjlab/restrict.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <map>

using namespace dhjlab;

TEST_CASE("restriction matches direct substitution") {
  Rng rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 3;
    const CubeSet s = oracle::random_set(n, Side::full, 0.5, rng);
    std::vector<int> I;
    Word z;
    for (int c = 0; c < n; ++c) {
      if (rng.bernoulli(0.5)) {
        I.push_back(c);
        z.push_back(static_cast<std::uint8_t>(rng.below(3)));
      }
    }
    const Restriction r = make_restriction(n, I, z);
    const CubeSet out = restrict_set(s, r);
    CHECK(out.dim() == n - static_cast<int>(I.size()));
    for (const auto& y : oracle::all_words(out.dim())) CHECK(out.contains(y) == s.contains(oracle::merge(y, I, z, n)));

    const CubeSet e1 = oracle::random_set(n, Side::zero_one, 0.5, rng);
    const CubeSet r1 = restrict_set(e1, restriction_for_side(r, Side::zero_one));
    for (const auto& y : oracle::all_words(r1.dim(), {0, 1})) CHECK(r1.contains(y) == e1.contains(pi1(oracle::merge(y, I, z, n))));
    const CubeSet e2 = oracle::random_set(n, Side::zero_two, 0.5, rng);
    const CubeSet r2 = restrict_set(e2, restriction_for_side(r, Side::zero_two));
    for (const auto& y : oracle::all_words(r2.dim(), {0, 2})) CHECK(r2.contains(y) == e2.contains(pi2(oracle::merge(y, I, z, n))));
  }
}

TEST_CASE("restriction validation") {
  const auto sorted = make_restriction(3, {2, 0}, Word{1, 2});
  CHECK(sorted.I == std::vector<int>{0, 2});
  CHECK(sorted.z == Word{2, 1});
  CHECK_THROWS_AS(make_restriction(3, {1, 1}, Word{0, 0}), InvalidArgument);
  CHECK_THROWS_AS(make_restriction(3, {0}, Word{0, 1}), InvalidArgument);
  CHECK_THROWS_AS(make_restriction(3, {3}, Word{0}), InvalidArgument);
  const auto r = make_restriction(3, {0, 2}, Word{1, 2});
  CHECK(r.survivors() == std::vector<int>{1});
}

TEST_CASE("collapse matches direct expansion") {
  Rng rng(29);
  for (int n = 1; n <= 4; ++n) {
    for (const auto& spec : oracle::all_collapses(n)) {
      const CubeSet s = oracle::random_set(n, Side::full, 0.5, rng);
      const CubeSet out = collapse_eq(s, spec);
      const auto map = collapse_map(n, spec);
      CHECK(out.dim() == collapsed_dim(n, spec));
      for (const auto& y : oracle::all_words(out.dim())) CHECK(out.contains(y) == s.contains(oracle::expand(y, map)));
    }
  }
  CHECK_THROWS_AS(collapse_eq(CubeSet::full(3), CollapseSpec{{{0, 1}, {1, 2}}}), InvalidArgument);
}

TEST_CASE("property: lifts of derived lines stay in the source set") {
  Rng rng(31);
  const int n = 4;
  const auto collapses = oracle::all_collapses(n);
  for (int trial = 0; trial < 4; ++trial) {
    const CubeSet s = oracle::random_set(n, Side::full, 0.7, rng);
    const Embedding root = Embedding::identity(n);
    for (std::uint64_t mask = 0; mask < 16; ++mask) {
      std::vector<int> I;
      for (int c = 0; c < n; ++c) {
        if (mask >> c & 1) I.push_back(c);
      }
      for (const auto& z : oracle::all_words(static_cast<int>(I.size()))) {
        const Restriction r = make_restriction(n, I, z);
        const CubeSet out = restrict_set(s, r);
        const Embedding e = root.after_restriction(r);
        for (const auto& l : lines_in_set(out, 1000).witnesses) {
          for (auto p : e.lift_line(l).points()) CHECK(s.has_cell(p));
        }
        for (std::uint64_t y = 0; y < out.cells(); ++y) {
          CHECK(out.has_cell(y) == s.contains(e.lift_point(point_digits(y, out.dim()))));
        }
      }
    }
    for (const auto& spec : collapses) {
      const CubeSet out = collapse_eq(s, spec);
      const Embedding e = root.after_collapse(spec);
      for (const auto& l : lines_in_set(out, 1000).witnesses) {
        const auto lifted = e.lift_line(l);
        CHECK(lifted.wildcard_count() >= 1);
        for (auto p : lifted.points()) CHECK(s.has_cell(p));
      }
    }
  }
}

TEST_CASE("sample_restriction") {
  const CoordLaw law = uniform_law();
  CHECK(sample_restriction(10, Rational(1), law, 3).I.empty());
  CHECK_THROWS_AS(sample_restriction(10, Rational(0), law, 3), InvalidArgument);
  std::uint64_t fixed = 0;
  std::map<int, int> symbols;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    const auto r = sample_restriction(10, Rational(1, 4), law, seed);
    fixed += r.I.size();
    for (auto s : r.z) symbols[s]++;
    CHECK(r.delta == Rational(1, 4));
    CHECK(r.seed == seed);
  }
  // 4000 coordinates fixed with probability 3/4: mean 3000, sd about 27
  CHECK(std::abs(static_cast<double>(fixed) - 3000) < 150);
  for (int s = 0; s < 3; ++s) CHECK(std::abs(symbols[s] - 1000) < 150);
  CHECK(sample_restriction(10, Rational(1, 2), law, 9).I == sample_restriction(10, Rational(1, 2), law, 9).I);
}

TEST_CASE("collapse distance matches full enumeration") {
  // law of v: T a uniform k-subset of s_coords, fused symbol and other inputs uniform
  auto brute = [](int n, const std::vector<int>& sc, int k) {
    std::map<Word, Rational> law;
    std::vector<std::vector<int>> subsets;
    for (std::uint64_t m = 0; m < (1ull << sc.size()); ++m) {
      if (std::popcount(m) != k) continue;
      std::vector<int> t;
      for (std::size_t i = 0; i < sc.size(); ++i) {
        if (m >> i & 1) t.push_back(sc[i]);
      }
      subsets.push_back(t);
    }
    for (const auto& t : subsets) {
      const CollapseSpec spec{{t}};
      const auto map = collapse_map(n, spec);
      const int m = collapsed_dim(n, spec);
      const Rational w = Rational(1, subsets.size()) / Rational(static_cast<unsigned long>(pow3(m)));
      for (const auto& y : oracle::all_words(m)) law[oracle::expand(y, map)] += w;
    }
    Rational tv = 0;
    const Rational u(1, static_cast<unsigned long>(pow3(n)));
    for (const auto& x : oracle::all_words(n)) tv += abs(law[x] - u);
    return Rational(tv / 2);
  };
  CHECK(tv_of_collapse(2, {0, 1}, 2, 0, 0).exact == Rational(2, 3));
  CHECK(brute(2, {0, 1}, 2) == Rational(2, 3));
  for (int n = 2; n <= 5; ++n) {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    for (int k = 2; k <= n; ++k) CHECK(tv_of_collapse(n, all, k, 0, 0).exact == brute(n, all, k));
  }
  CHECK(tv_of_collapse(4, {1, 3}, 2, 0, 0).exact == brute(4, {1, 3}, 2));
  CHECK(tv_of_collapse(5, {0, 2, 4}, 2, 0, 0).exact == brute(5, {0, 2, 4}, 2));
}

TEST_CASE("collapse distance bound at n = 6") {
  std::vector<int> all = {0, 1, 2, 3, 4, 5};
  for (int k = 1; k <= 3; ++k) {
    const auto r = tv_of_collapse(6, all, k, 2000, 5);
    CHECK(r.within_bound);
    CHECK(r.bound == doctest::Approx(10.0 * k / std::sqrt(6.0)));
    REQUIRE(r.sampled.has_value());
    CHECK(std::abs(*r.sampled - to_double(r.exact)) < 0.2);
  }
}
