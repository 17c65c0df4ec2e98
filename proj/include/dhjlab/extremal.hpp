#pragma once

#include "dhjlab/cube.hpp"

#include <cstdint>

namespace dhjlab {

struct ExtremalResult {
  int n = 0;
  std::uint64_t size = 0;
  CubeSet witness;
  bool optimal = false;
  std::uint64_t nodes = 0;
  double seconds = 0;
};

/// Largest line-free subset of [3]^n by branch and bound (n <= 5).
/// Stops at the time budget and then reports the incumbent with optimal = false.
ExtremalResult max_line_free(int n, double budget_seconds, std::uint64_t seed);

/// |S| == claimed and S contains no line.
bool verify_certificate(const CubeSet& S, std::uint64_t claimed);

/// S x {0,1} as a subset of [3]^(n+1); line-free whenever S is.
CubeSet extend_by_binary_digit(const CubeSet& S);

}  // namespace dhjlab
