#include "dhjlab/errors.hpp"
#include "dhjlab/extremal.hpp"
#include "dhjlab/increment.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace dhjlab;

namespace {

DensityTriple dictator_triple(int n) {
  CubeSet E1(n, Side::zero_one);
  for (std::uint64_t c = 0; c < E1.cells(); ++c) {
    if ((c >> (n - 1)) & 1) E1.set_cell(c);
  }
  const CubeSet E2 = CubeSet::full(n, Side::zero_two);
  return DensityTriple::make(disjoint_product(E1, E2), E1, E2);
}

DensityTriple triple_with_densities(int n, int e1_cells, int e2_cells) {
  CubeSet E1(n, Side::zero_one), E2(n, Side::zero_two);
  for (int c = 0; c < e1_cells; ++c) E1.set_cell(c);
  for (int c = 0; c < e2_cells; ++c) E2.set_cell(c);
  return DensityTriple::make(CubeSet(n, Side::full), E1, E2);
}

}  // namespace

TEST_CASE("partition index") {
  PartitionState full;
  full.entries.push_back({Rational(1), DensityTriple::root(CubeSet::full(3))});
  CHECK(partition_index(full) == 2);

  // densities under the (2/3, 1/3) side law: cells {00, 01} -> 2/3, {00} -> 4/9, {00, 01, 10} -> 8/9
  // weights 1/2, 1/2 with densities (2/3, 4/9) and (4/9, 0)
  PartitionState two;
  two.entries.push_back({Rational(1, 2), triple_with_densities(2, 2, 1)});
  two.entries.push_back({Rational(1, 2), triple_with_densities(2, 1, 0)});
  CHECK(partition_index(two) == (Rational(4, 9) + Rational(16, 81) + Rational(16, 81)) / 2);

  PartitionState one;
  one.entries.push_back({Rational(1), triple_with_densities(2, 3, 1)});
  CHECK(partition_index(one) == Rational(64, 81) + Rational(16, 81));

  PartitionState bad;
  bad.entries.push_back({Rational(0), triple_with_densities(2, 1, 1)});
  CHECK_THROWS_AS(partition_index(bad), InvalidArgument);

  two.entries.push_back(two.entries.front());
  two.entries[0].weight = Rational(1, 4);
  two.entries[2].weight = Rational(1, 4);
  const auto before = partition_index(two);
  two.merge();
  CHECK(two.entries.size() == 2);
  CHECK(partition_index(two) == before);
}

TEST_CASE("pigeonhole buckets") {
  std::vector<std::vector<double>> phases;
  for (int i = 0; i < 8; ++i) phases.push_back({i % 2 == 0 ? 0.01 : 0.51, 0.3});
  const auto groups = pigeonhole_buckets(phases, 2, 4, 0.25);
  REQUIRE(groups.size() == 2);
  for (const auto& g : groups) {
    CHECK(g.size() == 4);
    for (auto j : g) CHECK(phases[j][0] == phases[g.front()][0]);
  }

  std::vector<std::vector<double>> spread;
  for (int i = 0; i < 10; ++i) spread.push_back({i / 10.0});
  try {
    pigeonhole_buckets(spread, 4, 4, 0.25);
    FAIL("expected a shortfall");
  } catch (const BucketShortfall& s) {
    CHECK(s.achievable_groups < 4);
    CHECK(s.achievable_size == 3);
  }
  CHECK_THROWS_AS(pigeonhole_buckets(spread, 0, 4, 0.25), InvalidArgument);
}

TEST_CASE("property: pigeonhole groups are disjoint and narrow") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<double>> phases(40, std::vector<double>(2));
    for (auto& v : phases) {
      for (auto& x : v) x = rng.uniform();
    }
    try {
      const auto groups = pigeonhole_buckets(phases, 2, 3, 0.5);
      std::vector<int> seen(phases.size(), 0);
      for (const auto& g : groups) {
        for (auto j : g) {
          CHECK(++seen[j] == 1);
          for (int d = 0; d < 2; ++d) CHECK(std::abs(phases[j][d] - phases[g.front()][d]) <= 0.5);
        }
      }
    } catch (const BucketShortfall&) {
      FAIL("40 points in 4 cells always give two groups of 3");
    }
  }
}

TEST_CASE("dirichlet k") {
  CHECK(dirichlet_k({0.0, 0.0}, 4, 0.01).k == 1);
  const auto thirds = dirichlet_k({1.0 / 3, 2.0 / 3}, 3, 0.01);
  CHECK(thirds.k == 3);
  const auto none = dirichlet_k({0.1234, 0.377}, 2, 0.001);
  CHECK_FALSE(none.k.has_value());
  CHECK(none.norm > 0.001);
  CHECK(torus_norm(0.9) == doctest::Approx(0.1));
  CHECK_THROWS_AS(dirichlet_k({0.5}, 0, 0.1), InvalidArgument);
}

TEST_CASE("triple operations and replay") {
  Rng rng(7);
  const CubeSet S0 = oracle::random_set(4, Side::full, 0.7, rng);
  const auto root = DensityTriple::root(S0);
  CHECK(root.delta1 == 1);
  CHECK(root.delta2 == 1);
  CHECK(root.alpha == uniform_measure(S0));

  ProvenanceStep r;
  r.kind = ProvenanceStep::Kind::restrict;
  r.restriction = make_restriction(4, {2}, Word{1});
  ProvenanceStep c;
  c.kind = ProvenanceStep::Kind::collapse;
  c.collapse.blocks = {{0, 2}};
  CubeSet f1(2, Side::zero_one), f2 = CubeSet::full(2, Side::zero_two);
  f1.set_cell(0);
  f1.set_cell(1);
  ProvenanceStep f;
  f.kind = ProvenanceStep::Kind::refine;
  f.f1 = f1;
  f.f2 = f2;

  const auto t = root.apply(r).apply(c).apply(f);
  CHECK(t.dim() == 2);
  CHECK(t.provenance.size() == 3);
  CHECK(replay(S0, t.provenance).same_sets(t));
  CHECK(t.embedding.root_dim() == 4);
  CHECK(t.embedding.fixed_symbol(2) == std::uint8_t{1});

  // S stays inside the box and membership lifts to the root
  for (std::uint64_t cell = 0; cell < t.S.cells(); ++cell) {
    if (!t.S.has_cell(cell)) continue;
    const Word x = t.S.word_of(cell);
    CHECK(t.E1.contains(pi1(x)));
    CHECK(t.E2.contains(pi2(x)));
    CHECK(S0.contains(t.embedding.lift_point(x)));
  }
  CHECK_THROWS_AS(DensityTriple::make(CubeSet::full(2), CubeSet(2, Side::zero_one), CubeSet::full(2, Side::zero_two)),
                  InvalidArgument);
}

TEST_CASE("uniformization raises the index on a dictator") {
  ParamSet p;
  const auto t = dictator_triple(12);
  const auto r = uniformize(t, Rational(1, 2), p, 4, 11);
  CHECK(r.status == UniformizeStatus::terminated);
  REQUIRE(r.rounds >= 1);
  CHECK(r.index_strict);
  CHECK(r.index_monotone);
  CHECK(r.index_trajectory.back() > r.index_trajectory.front());
  for (const auto& w : r.weight_totals) CHECK(w == 1);
  CHECK(r.final_partition.total_weight() == 1);
}

TEST_CASE("uniformization stops at once on the full cube") {
  ParamSet p;
  const auto r = uniformize(DensityTriple::root(CubeSet::full(8)), Rational(1, 2), p, 4, 2);
  CHECK(r.status == UniformizeStatus::terminated);
  CHECK(r.rounds == 0);
  CHECK(r.selected.same_sets(DensityTriple::root(CubeSet::full(8))));
}

TEST_CASE("increment step outcomes") {
  ParamSet p;
  const auto full = increment_step(DensityTriple::root(CubeSet::full(3)), p, 1);
  REQUIRE(full.kind == IncrementOutcome::Kind::line_found);
  REQUIRE(full.lifted.has_value());
  CHECK(verify_lifted_line(CubeSet::full(3), *full.lifted));

  const auto empty = increment_step(DensityTriple::root(CubeSet(3, Side::full)), p, 1);
  CHECK(empty.kind == IncrementOutcome::Kind::diagnostic);

  const auto ext = max_line_free(2, 10, 0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    CHECK(increment_step(DensityTriple::root(ext.witness), p, seed).kind != IncrementOutcome::Kind::line_found);
  }
}

TEST_CASE("driver") {
  ParamSet p;
  const auto full = main_driver(CubeSet::full(3), p, 8, 3);
  CHECK(full.outcome == IncrementOutcome::Kind::line_found);
  CHECK(full.line_verified);
  CHECK(full.provenance_ok);

  const auto ext = max_line_free(3, 10, 0);
  const auto free = main_driver(ext.witness, p, 4, 3);
  CHECK(free.outcome != IncrementOutcome::Kind::line_found);
  CHECK(free.provenance_ok);
  CHECK_FALSE(free.trace.empty());
}

TEST_CASE("lifted line check") {
  CHECK(verify_lifted_line(CubeSet::full(2), LineTemplate{Word{3, 0}}));
  CHECK_FALSE(verify_lifted_line(CubeSet::full(2), LineTemplate{Word{1, 0}}));
  CubeSet s = CubeSet::full(2);
  s.set_cell(s.cell_of(Word{2, 0}), false);
  CHECK_FALSE(verify_lifted_line(s, LineTemplate{Word{3, 0}}));
}

TEST_CASE("parameter sets") {
  ParamSet p;
  p.K = 7;
  p.eta_prime = Rational(1, 7000);
  p.desk = false;
  const auto back = param_set_from_json(to_json(p));
  CHECK(to_json(back) == to_json(p));
  CHECK(back.eta_prime == Rational(1, 7000));
  CHECK_NOTHROW(p.validate());
  ParamSet bad;
  bad.gamma = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  ParamSet bad_tau;
  bad_tau.tau = 0;
  CHECK_THROWS_AS(bad_tau.validate(), InvalidArgument);
  CHECK(p.n_prime(16) >= 1);
}
