#pragma once

#include "dhjlab/dist.hpp"

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace dhjlab {

/// Result of the one-coordinate-move connectivity test on a support.
///
/// When connected, tree holds |support|-1 edges (pairs of support indices)
/// forming a spanning tree. Otherwise side holds the indices reachable from
/// the first tuple; no tuple in side is adjacent to a tuple outside it.
struct Connectivity {
  bool connected = false;
  std::vector<std::pair<std::size_t, std::size_t>> tree;
  std::vector<std::size_t> side;
};

/// Tuples differing in exactly one coordinate are adjacent.
Connectivity is_connected(std::span<const Word> support);

/// Re-checks a certificate produced by is_connected.
bool check_certificate(std::span<const Word> support, const Connectivity& c);

struct PairwiseConnectivity {
  bool connected = true;
  std::optional<std::pair<std::size_t, std::size_t>> failing;
};

/// Graph on disjoint copies of Sigma_i and Sigma_j with an edge per support pair of mu_ij.
bool pair_graph_connected(std::span<const Word> pairs, const Alphabet& left, const Alphabet& right);

PairwiseConnectivity is_pairwise_connected(const JointDist& d);
/// Alphabets are taken to be the symbols seen in each coordinate.
PairwiseConnectivity is_pairwise_connected(std::span<const Word> support);

struct ProjectionCheck {
  std::vector<std::size_t> coords;
  Connectivity result;
};

/// Connectivity of every marginal support onto all but one coordinate.
std::vector<ProjectionCheck> check_all_k_minus_1_projections(std::span<const Word> support);
std::vector<ProjectionCheck> check_all_k_minus_1_projections(const JointDist& d);

/// Distinct projected tuples of support onto coords, sorted.
std::vector<Word> project_support(std::span<const Word> support, std::span<const std::size_t> coords);

}  // namespace dhjlab
