#include "dhjlab/errors.hpp"
#include "dhjlab/increment.hpp"
#include "dhjlab/io.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cstdio>

using namespace dhjlab;

TEST_CASE("sets round trip") {
  Rng rng(3);
  for (Side side : {Side::full, Side::zero_one, Side::zero_two}) {
    const CubeSet s = oracle::random_set(4, side, 0.5, rng);
    CHECK(set_from_json(set_to_json(s)) == s);
  }
}

TEST_CASE("distributions round trip") {
  const auto d = atom_distribution();
  CHECK(dist_from_json(dist_to_json(d)) == d);
  const auto mu1 = build_mu1(d);
  CHECK(dist_from_json(dist_to_json(mu1)) == mu1);
}

TEST_CASE("restrictions round trip") {
  const auto r = make_restriction(6, {4, 1}, Word{2, 0});
  const auto back = restriction_from_json(restriction_to_json(r));
  CHECK(back.n == r.n);
  CHECK(back.I == r.I);
  CHECK(back.z == r.z);
  CHECK(back.delta == r.delta);
}

TEST_CASE("tables round trip") {
  FunctionTable f = FunctionTable::constant(2, {0, 1}, Complex(0.25, -0.5));
  f.values[3] = Complex(1, 0);
  const auto back = table_from_json(table_to_json(f));
  CHECK(back.n == f.n);
  CHECK(back.alphabet == f.alphabet);
  CHECK(back.values == f.values);
}

TEST_CASE("files round trip") {
  const std::string path = "dhjlab_io_test.json";
  const auto j = set_to_json(CubeSet::full(2));
  write_json(j, path);
  CHECK(read_json_file(path) == j);
  std::remove(path.c_str());
  CHECK_THROWS(read_json_file("no-such-file.json"));
}

TEST_CASE("malformed input is rejected") {
  nlohmann::json bad = set_to_json(CubeSet::full(1));
  bad["points"].push_back("7");
  CHECK_THROWS_AS(set_from_json(bad), InvalidArgument);
}
