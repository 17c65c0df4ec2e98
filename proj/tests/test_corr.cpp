#include "dhjlab/corr.hpp"
#include "dhjlab/errors.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace dhjlab;

namespace {

FunctionTable random_table(int n, Alphabet alphabet, Rng& rng, bool signs) {
  FunctionTable f;
  f.n = n;
  f.alphabet = alphabet;
  std::size_t size = 1;
  for (int i = 0; i < n; ++i) size *= alphabet.size();
  for (std::size_t i = 0; i < size; ++i) {
    if (signs) f.values.emplace_back(rng.bernoulli(0.5) ? 1.0 : -1.0, 0.0);
    else f.values.push_back(std::polar(rng.uniform(), 2 * M_PI * rng.uniform()));
  }
  return f;
}

ProductFunction random_product(int n, Alphabet alphabet, Rng& rng) {
  std::vector<std::vector<double>> ph(n, std::vector<double>(alphabet.size()));
  for (auto& v : ph) {
    for (auto& x : v) x = rng.uniform();
  }
  return ProductFunction::from_phases(alphabet, ph);
}

FunctionTable dictator(int n, const Alphabet& alphabet, std::uint8_t symbol, double shift) {
  FunctionTable f;
  f.n = n;
  f.alphabet = alphabet;
  for (const auto& w : oracle::all_words(n, alphabet)) f.values.emplace_back((w[0] == symbol ? 1.0 : 0.0) - shift, 0.0);
  return f;
}

}  // namespace

TEST_CASE("correlate agrees with a direct sum") {
  Rng rng(41);
  const Alphabet abc{0, 1, 2};
  const std::vector<double> law = {0.5, 0.25, 0.25};
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + trial % 3;
    const auto f = random_table(n, abc, rng, false);
    const auto p = random_product(n, abc, rng);
    Complex brute = 0;
    std::size_t i = 0;
    for (const auto& w : oracle::all_words(n)) {
      double weight = 1;
      for (auto s : w) weight *= law[s];
      brute += weight * f.values[i++] * p.eval(w);
    }
    CHECK(std::abs(correlate(f, p, law) - brute) < 1e-12);
  }
}

TEST_CASE("k-wise correlation agrees with tuple enumeration") {
  Rng rng(43);
  const JointDist d = atom_distribution();
  const Alphabet abc{0, 1, 2};
  for (int n = 1; n <= 3; ++n) {
    const std::vector<FunctionTable> fs = {random_table(n, abc, rng, false), random_table(n, abc, rng, false),
                                           random_table(n, abc, rng, false)};
    // templates: one atom per coordinate
    Complex brute = 0;
    const std::size_t atoms = d.rows().size();
    std::vector<std::size_t> pick(n, 0);
    while (true) {
      double w = 1;
      Word x(n), y(n), z(n);
      for (int c = 0; c < n; ++c) {
        const auto& row = d.rows()[pick[c]];
        w *= to_double(row.p);
        x[c] = row.t[0];
        y[c] = row.t[1];
        z[c] = row.t[2];
      }
      brute += w * fs[0].at(x) * fs[1].at(y) * fs[2].at(z);
      int c = 0;
      while (c < n && ++pick[c] == atoms) pick[c++] = 0;
      if (c == n) break;
    }
    const auto exact = kwise_correlation(fs, d, CorrMode::exact);
    CHECK(exact.method == "exact");
    CHECK(std::abs(exact.value - brute) < 1e-12);
    const auto mc = kwise_correlation(fs, d, CorrMode::monte_carlo, 1e8, 40000, 5);
    CHECK(std::abs(mc.value - brute) < 5 * mc.stderr_ + 1e-9);
  }
  const std::vector<FunctionTable> big(3, FunctionTable::constant(12, abc, 1.0));
  CHECK_THROWS_AS(kwise_correlation(big, d, CorrMode::exact, 1e3), FallbackToSampling);
  CHECK(kwise_correlation(big, d, CorrMode::automatic, 1e3, 1000, 1).method == "monte-carlo");
}

TEST_CASE("set correlation is exact") {
  Rng rng(47);
  const JointDist d = atom_distribution();
  for (int n = 1; n <= 3; ++n) {
    const CubeSet a = oracle::random_set(n, Side::full, 0.6, rng);
    const CubeSet b = oracle::random_set(n, Side::full, 0.6, rng);
    const CubeSet sets[] = {a, b, a};
    Rational brute = 0;
    std::vector<std::size_t> pick(n, 0);
    while (true) {
      Rational w = 1;
      Word x(n), y(n), z(n);
      for (int c = 0; c < n; ++c) {
        const auto& row = d.rows()[pick[c]];
        w *= row.p;
        x[c] = row.t[0];
        y[c] = row.t[1];
        z[c] = row.t[2];
      }
      if (a.contains(x) && b.contains(y) && a.contains(z)) brute += w;
      int c = 0;
      while (c < n && ++pick[c] == 4) pick[c++] = 0;
      if (c == n) break;
    }
    CHECK(set_correlation(sets, d) == brute);
  }
  CHECK(line_density(CubeSet::full(3), atom_distribution()) == 1);
}

TEST_CASE("maximizer returns 1 on product inputs") {
  Rng rng(53);
  const std::vector<double> law = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  const Alphabet abc{0, 1, 2};
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + trial % 5;
    const auto p = random_product(n, abc, rng);
    FunctionTable f;
    f.n = n;
    f.alphabet = abc;
    for (const auto& w : oracle::all_words(n)) f.values.push_back(std::conj(p.eval(w)));
    MaxOptions mo;
    mo.seed = trial;
    const auto r = max_product_correlation(f, law, mo);
    CHECK(r.magnitude == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.monotone_violations == 0);
  }
}

TEST_CASE("property: alternating updates never decrease the objective") {
  Rng rng(59);
  const std::vector<double> law = {0.2, 0.5, 0.3};
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = random_table(2 + trial % 5, {0, 1, 2}, rng, false);
    std::vector<double> traj;
    MaxOptions mo;
    mo.restarts = 1;
    mo.seed = trial;
    mo.trajectory = &traj;
    const auto r = max_product_correlation(f, law, mo);
    CHECK(r.monotone_violations == 0);
    for (std::size_t i = 1; i < traj.size(); ++i) {
      if (traj[i] == 0 && i + 1 < traj.size()) continue;
      CHECK(traj[i] >= traj[i - 1] - 1e-12);
    }
  }
}

TEST_CASE("alternating maximum agrees with the phase grid at n = 2") {
  Rng rng(61);
  const std::vector<double> law = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  for (int trial = 0; trial < 5; ++trial) {
    const auto f = random_table(2, {0, 1, 2}, rng, trial % 2 == 0);
    MaxOptions grid;
    grid.method = MaxMethod::grid;
    grid.grid_resolution = 2048;
    const auto g = max_product_correlation(f, law, grid);
    MaxOptions alt;
    alt.seed = trial;
    alt.restarts = 16;
    const auto a = max_product_correlation(f, law, alt);
    CHECK(a.magnitude >= g.magnitude - 1e-3);
    CHECK(a.magnitude <= g.magnitude + g.gap_bound + 1e-9);
    CHECK(g.gap_bound < 3e-3);
  }
}

TEST_CASE("dictator correlations") {
  // 1_{x1 = 1} - 1/2 under uniform {0,1}: every product function reaches at most E|f| = 1/2
  const auto f = dictator(5, {0, 1}, 1, 0.5);
  const std::vector<double> half = {0.5, 0.5};
  MaxOptions mo;
  const auto r = max_product_correlation(f, half, mo);
  CHECK(r.magnitude == doctest::Approx(0.5).epsilon(1e-9));
  REQUIRE(r.real_value.has_value());
  CHECK(*r.real_value == doctest::Approx(0.5).epsilon(1e-9));

  // 1_{x1 = 0} - 1/3 on [3] under uniform: E|f| = 1/3 * 2/3 + 2/3 * 1/3 = 4/9
  const auto g = dictator(4, {0, 1, 2}, 0, 1.0 / 3);
  const std::vector<double> third = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  CHECK(max_product_correlation(g, third, mo).magnitude == doctest::Approx(4.0 / 9).epsilon(1e-9));
}

TEST_CASE("wilson interval and delta grid") {
  const auto [lo, hi] = wilson_interval(0, 10, 1.96);
  CHECK(lo == 0);
  CHECK(hi == doctest::Approx(0.2775).epsilon(1e-3));
  const auto [lo2, hi2] = wilson_interval(10, 10, 1.96);
  CHECK(lo2 == doctest::Approx(0.7225).epsilon(1e-3));
  CHECK(hi2 == 1);
  const auto grid = delta_grid(12, 3, 2);
  REQUIRE(grid.size() == 3);
  CHECK(grid[0] == Rational(1, 4));
  CHECK(grid[1] == Rational(1, 2));
  CHECK(grid[2] == 1);
}

TEST_CASE("tester verdicts") {
  const std::vector<double> half = {0.5, 0.5};
  PseudoOptions opt;
  opt.trials = 20;
  opt.seed = 3;

  const auto zero = product_pseudorandom_test(FunctionTable::constant(8, {0, 1}, 0.0), 2, 0.3, half, opt);
  CHECK(zero.zero_function);
  CHECK(zero.verdict == Verdict::pseudorandom);

  const auto dict = product_pseudorandom_test(dictator(8, {0, 1}, 1, 0.5), 2, 0.3, half, opt);
  CHECK(dict.verdict == Verdict::not_pseudorandom);
  REQUIRE(dict.witness() != nullptr);
  CHECK(dict.witness()->best >= 0.5 - 1e-9);
  REQUIRE(dict.witness()->witness_restriction.has_value());
  REQUIRE(dict.witness()->witness.has_value());
  // the witness is checkable: recompute its correlation on the restricted function
  const auto restricted = restrict_table(dictator(8, {0, 1}, 1, 0.5), *dict.witness()->witness_restriction);
  CHECK(std::abs(correlate(restricted, *dict.witness()->witness, half)) >= 0.5 - 1e-9);

  Rng rng(67);
  const auto noise = random_table(12, {0, 1}, rng, true);
  opt.trials = 50;
  const auto rand = product_pseudorandom_test(noise, 10, 0.3, half, opt);
  CHECK(rand.verdict == Verdict::pseudorandom);

  CHECK_THROWS_AS(product_pseudorandom_test(noise, 10, 1.5, half, opt), InvalidArgument);
}

TEST_CASE("restrict_table agrees with restrict_set") {
  Rng rng(71);
  const CubeSet s = oracle::random_set(4, Side::full, 0.5, rng);
  const auto r = make_restriction(4, {1, 3}, Word{2, 0});
  const auto t = restrict_table(FunctionTable::indicator(s), r);
  const CubeSet rs = restrict_set(s, r);
  for (std::uint64_t c = 0; c < rs.cells(); ++c) CHECK(t.values[c].real() == (rs.has_cell(c) ? 1.0 : 0.0));
}
