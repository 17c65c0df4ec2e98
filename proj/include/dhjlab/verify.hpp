#pragma once

#include "dhjlab/cube.hpp"
#include "dhjlab/dist.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace dhjlab {

enum class ClaimStatus { pass, fail, skipped };
std::string_view to_string(ClaimStatus s);

struct ClaimReport {
  std::string id;
  ClaimStatus status = ClaimStatus::skipped;
  nlohmann::json certificate = nlohmann::json::object();
  double seconds = 0;

  bool passed() const { return status == ClaimStatus::pass; }
};

/// Directory holding reference_tables.json: $DHJLAB_DATA, else the build-time default.
std::string data_dir();
nlohmann::json load_reference_tables(const std::string& dir = data_dir());

/// Supports of mu1, mu2, mu3 built from line against the transcribed rows.
std::vector<ClaimReport> verify_table_supports(const nlohmann::json& tables, const JointDist& line = atom_distribution());

std::vector<ClaimReport> verify_connectivity_claims(const nlohmann::json& tables);

/// Product identity over every pair of mu2 rows (a dimension-2 word per variable)
/// and every e1 on {0,1}^2, e2 on {0,2}^2.
ClaimReport verify_factor_reduction(const nlohmann::json& tables, std::span<const Word> mu2_rows);
ClaimReport verify_factor_reduction(const nlohmann::json& tables);
/// Same sweep with x' of the fourth row changed from 0 to 1; expected to fail.
ClaimReport verify_factor_reduction_control(const nlohmann::json& tables);

ClaimReport verify_mu2_marginals();
ClaimReport verify_mu4_support(const nlohmann::json& tables);

/// Twenty parameter points with K eta' <= eta / 100.
std::vector<ChainParams> default_chain_grid();
/// Both bounds on nu^(i) and xi^(ij) for every i < j, compared exactly (squared against n).
ClaimReport verify_obs_joint(std::span<const ChainParams> grid);

/// Best pair value E[1_S(y) 1_S(z)] against mu(S)^2 - 6 eta - mu(S)/K.
ClaimReport verify_mainterm(const CubeSet& S, const ChainParams& params);

/// Exact |mu(E1 box E2) - mu(E1) mu(E2)| with tester verdicts for both sets.
/// Fails only if both sets are certified pseudorandom while the discrepancy exceeds 2 sqrt(gamma).
ClaimReport verify_me1e2(const CubeSet& E1, const CubeSet& E2, double gamma, std::uint64_t trials, std::uint64_t seed);

/// Every claim above with default inputs; keyed by claim id.
std::vector<ClaimReport> verify_all(int threads = 1, std::uint64_t seed = 0);
nlohmann::json to_json(const std::vector<ClaimReport>& reports);

}  // namespace dhjlab
