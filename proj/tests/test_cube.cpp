#include "dhjlab/cube.hpp"
#include "dhjlab/errors.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace dhjlab;

TEST_CASE("point index round trip") {
  for (int n = 0; n <= 5; ++n) {
    for (std::uint64_t i = 0; i < pow3(n); ++i) CHECK(point_index(point_digits(i, n)) == i);
  }
  CHECK(point_index(parse_word("102")) == 9 + 2);
  CHECK(format_word(parse_word("2201")) == "2201");
  CHECK_THROWS_AS(parse_word("13"), InvalidArgument);
}

TEST_CASE("projections") {
  const Word x = parse_word("0121");
  CHECK(format_word(pi1(x)) == "0101");
  CHECK(format_word(pi2(x)) == "0020");
  for (std::uint64_t i = 0; i < pow3(3); ++i) {
    const Word w = point_digits(i, 3);
    CubeSet one(3, Side::zero_one);
    CHECK(one.cell_of(pi1(w)) == pi1_cell(i, 3));
    CubeSet two(3, Side::zero_two);
    CHECK(two.cell_of(pi2(w)) == pi2_cell(i, 3));
  }
}

TEST_CASE("line count is 4^n - 3^n") {
  std::uint64_t four = 1, three = 1;
  for (int n = 1; n <= 8; ++n) {
    four *= 4;
    three *= 3;
    CHECK(line_count(n) == four - three);
    CHECK(enumerate_lines(n).size() == four - three);
  }
}

TEST_CASE("line enumeration matches the triple scan") {
  for (int n = 1; n <= 3; ++n) {
    const CubeSet full = CubeSet::full(n);
    CHECK(lines_in_set(full).count == oracle::count_lines(full));
  }
  CHECK(lines_in_set(CubeSet::full(2)).count == 7);
}

TEST_CASE("every enumerated template is a distinct valid line") {
  for (int n = 1; n <= 4; ++n) {
    const auto lines = enumerate_lines(n);
    std::vector<std::array<std::uint64_t, 3>> seen;
    for (const auto& l : lines) {
      CHECK(l.wildcard_count() >= 1);
      auto p = l.points();
      CHECK(is_line(p[0], p[1], p[2], n));
      CHECK(oracle::ordered_line(point_digits(p[0], n), point_digits(p[1], n), point_digits(p[2], n)));
      std::sort(p.begin(), p.end());
      seen.push_back(p);
    }
    std::sort(seen.begin(), seen.end());
    CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
  }
}

TEST_CASE("is_line examples") {
  CHECK(is_line(point_index(parse_word("00")), point_index(parse_word("11")), point_index(parse_word("22")), 2));
  CHECK(is_line(point_index(parse_word("10")), point_index(parse_word("11")), point_index(parse_word("12")), 2));
  CHECK_FALSE(is_line(point_index(parse_word("00")), point_index(parse_word("12")), point_index(parse_word("21")), 2));
  CHECK_FALSE(is_line(4, 4, 4, 2));
}

TEST_CASE("property: lines_in_set agrees with the triple scan on random sets") {
  Rng rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 3;
    const CubeSet s = oracle::random_set(n, Side::full, 0.3 + 0.01 * trial, rng);
    const auto count = oracle::count_lines(s);
    CHECK(lines_in_set(s).count == count);
    CHECK(is_line_free(s) == (count == 0));
    const auto found = find_line(s);
    CHECK(found.has_value() == (count > 0));
    if (found) {
      for (auto p : found->points()) CHECK(s.has_cell(p));
    }
  }
}

TEST_CASE("disjoint product") {
  const int n = 2;
  const Word e1w[] = {parse_word("10")};
  const Word e2w[] = {parse_word("02")};
  const CubeSet e1 = CubeSet::from_words(n, Side::zero_one, e1w);
  const CubeSet e2 = CubeSet::from_words(n, Side::zero_two, e2w);
  const CubeSet box = disjoint_product(e1, e2);
  CHECK(box.size() == 1);
  CHECK(box.contains(parse_word("12")));

  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 1 + trial % 4;
    const CubeSet a = oracle::random_set(m, Side::zero_one, 0.5, rng);
    const CubeSet b = oracle::random_set(m, Side::zero_two, 0.5, rng);
    const CubeSet p = disjoint_product(a, b);
    for (std::uint64_t x = 0; x < pow3(m); ++x) {
      const Word w = point_digits(x, m);
      CHECK(p.has_cell(x) == (a.contains(pi1(w)) && b.contains(pi2(w))));
    }
    CHECK(p.subset_of(pullback(a)));
    CHECK(p == pullback(a).intersect(pullback(b)));
  }
  CHECK(disjoint_product(CubeSet::full(3, Side::zero_one), CubeSet::full(3, Side::zero_two)) == CubeSet::full(3));
}

TEST_CASE("measure") {
  CHECK(uniform_measure(CubeSet::full(4)) == 1);
  CHECK(uniform_measure(CubeSet(4, Side::full)) == 0);
  // pulled-back one-sided sets: pi1(x)_1 = 1 has measure 1/3
  CubeSet dict(3, Side::zero_one);
  for (std::uint64_t c = 0; c < dict.cells(); ++c) {
    if (c & 4) dict.set_cell(c);
  }
  CHECK(uniform_measure(dict) == Rational(1, 3));
  const CoordLaw law{Rational(1, 2), Rational(1, 4), Rational(1, 4)};
  const CoordLaw laws[] = {law};
  CHECK(measure(dict, laws) == Rational(1, 4));

  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const CubeSet s = oracle::random_set(3, Side::full, 0.4, rng);
    Rational brute = 0;
    for (std::uint64_t x = 0; x < 27; ++x) {
      if (!s.has_cell(x)) continue;
      Rational w = 1;
      for (auto d : point_digits(x, 3)) w *= law[d];
      brute += w;
    }
    CHECK(measure(s, laws) == brute);
    CHECK(uniform_measure(s) == make_rational(static_cast<long>(s.size()), 27));
  }
}

TEST_CASE("set algebra") {
  Rng rng(5);
  const CubeSet a = oracle::random_set(3, Side::full, 0.5, rng);
  const CubeSet b = oracle::random_set(3, Side::full, 0.5, rng);
  CHECK(a.intersect(b).size() + a.unite(b).size() == a.size() + b.size());
  CHECK(a.complement().size() == 27 - a.size());
  CHECK(a.intersect(b).subset_of(a));
  CHECK_THROWS_AS(a.intersect(CubeSet::full(2)), InvalidArgument);
}
