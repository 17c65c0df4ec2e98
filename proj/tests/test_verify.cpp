#include "dhjlab/errors.hpp"
#include "dhjlab/verify.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <set>

using namespace dhjlab;

TEST_CASE("every default claim passes") {
  const auto reports = verify_all(2, 0);
  std::set<std::string> ids;
  for (const auto& r : reports) {
    INFO(r.id);
    CHECK(r.passed());
    ids.insert(r.id);
  }
  CHECK(ids.size() == reports.size());
  for (const char* id : {"tables.mu1", "tables.mu2", "tables.mu3", "connect.eyz", "connect.yy", "connect.mu4",
                         "factor_reduction", "factor_reduction.control", "mu2_marginals", "chain_bounds"}) {
    CHECK(ids.count(id) == 1);
  }
  const auto j = to_json(reports);
  CHECK(j.size() == reports.size());
}

TEST_CASE("factor reduction control detects the edited row") {
  const auto tables = load_reference_tables();
  CHECK(verify_factor_reduction(tables).passed());
  const auto control = verify_factor_reduction_control(tables);
  // the control claim passes exactly when the edited sweep finds a mismatch
  CHECK(control.passed());
  CHECK(control.certificate.contains("counterexample"));
}

TEST_CASE("a different line law changes the table supports") {
  const auto tables = load_reference_tables();
  // uniform on the three constant atoms: no wildcard atom
  const JointDist diag({{0, 1, 2}, {0, 1, 2}, {0, 1, 2}},
                       {{Word{0, 0, 0}, Rational(1, 3)}, {Word{1, 1, 1}, Rational(1, 3)}, {Word{2, 2, 2}, Rational(1, 3)}});
  const auto reports = verify_table_supports(tables, diag);
  bool any_fail = false;
  for (const auto& r : reports) any_fail = any_fail || !r.passed();
  CHECK(any_fail);
  for (const auto& r : verify_table_supports(tables)) CHECK(r.passed());
}

TEST_CASE("mu4 support and marginals") {
  const auto tables = load_reference_tables();
  CHECK(verify_mu4_support(tables).passed());
  CHECK(verify_mu2_marginals().passed());
}

TEST_CASE("chain grid respects the parameter constraint") {
  const auto grid = default_chain_grid();
  CHECK(grid.size() == 20);
  for (const auto& g : grid) CHECK(Rational(g.K) * g.eta_prime <= g.eta / 100);
  CHECK(verify_obs_joint(grid).passed());
}

TEST_CASE("main term on random sets") {
  Rng rng(13);
  const auto params = ChainParams::rounded(4, Rational(1, 4000), Rational(1, 10), 6);
  for (int trial = 0; trial < 5; ++trial) {
    const CubeSet S = oracle::random_set(6, Side::full, 0.2 + 0.15 * trial, rng);
    CHECK(verify_mainterm(S, params).passed());
  }
}

TEST_CASE("box discrepancy") {
  CubeSet E1(6, Side::zero_one);
  for (std::uint64_t c = 0; c < E1.cells(); ++c) {
    if ((c >> 5) & 1) E1.set_cell(c);
  }
  CHECK(verify_me1e2(E1, CubeSet::full(6, Side::zero_two), 0.3, 10, 1).passed());
}

TEST_CASE("data directory override") {
  CHECK_FALSE(data_dir().empty());
  CHECK_THROWS(load_reference_tables("/nonexistent-dir"));
}
