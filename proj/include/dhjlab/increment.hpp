#pragma once

#include "dhjlab/corr.hpp"
#include "dhjlab/cube.hpp"
#include "dhjlab/restrict.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dhjlab {

/// Tunables of the increment engine. Exponent fields keep the asymptotic
/// values; the desk fields are what the code actually uses when desk is set.
struct ParamSet {
  Rational alpha{1, 2};
  Rational tau{1, 20};
  Rational tau_tilde{1, 100};
  double gamma = 0.3;
  double gamma_prime = 0.3;
  unsigned K = 4;
  Rational eta{1, 10};
  Rational eta_prime{1, 4000};

  double zeta = 1.0 / 72;
  double dirichlet_exponent = 1.0 / 12;
  double radius_exponent = 1.0 / 6;
  double quality_exponent = 1.0 / 36;
  double n_prime_exponent = 1.0 / 4;

  bool desk = true;
  int groups = 4;
  int group_size = 4;
  double radius = 1.0 / 8;
  double eps = 1.0 / 16;
  int k_max = 8;

  std::uint64_t tester_trials = 20;
  int tester_restarts = 4;
  int threads = 1;
  std::uint64_t z_cap = 729;    // enumerate z over [3]^I up to this many
  std::uint64_t u_cap = 2187;   // enumerate u over [3]^J up to this many
  int balanced_rounds = 1;      // rounds of 3 balanced draws when sampling
  int increment_samples = 16;   // restrictions tried per case in increment_step

  void validate() const;
  int n_prime(int n) const;
  // the pigeonhole / Dirichlet settings in force for a restricted dimension m
  int group_count(int m) const;
  int group_size_for(int m) const;
  double radius_for(int m) const;
  int k_max_for(int m) const;
  double eps_for(int m) const;
};

nlohmann::json to_json(const ParamSet& p);
ParamSet param_set_from_json(const nlohmann::json& j);

/// One derivation step from the parent triple.
struct ProvenanceStep {
  enum class Kind { restrict, collapse, refine };
  Kind kind = Kind::restrict;
  Restriction restriction;  // z over [3]; E1/E2 see pi1(z)/pi2(z)
  CollapseSpec collapse;
  CubeSet f1;  // refine: E1 := E1 & f1
  CubeSet f2;  // refine: E2 := E2 & f2
};

struct DensityTriple {
  CubeSet S;   // full side
  CubeSet E1;  // zero-one
  CubeSet E2;  // zero-two
  Rational mu_s;
  Rational mu_box;
  Rational alpha;  // mu(S) / mu(E1 box E2), 0 when the box is empty
  Rational delta1;
  Rational delta2;
  std::vector<ProvenanceStep> provenance;
  Embedding embedding;

  int dim() const { return S.dim(); }

  /// Validates sides, dimensions and S within E1 box E2.
  static DensityTriple make(CubeSet S, CubeSet E1, CubeSet E2);
  /// (S0, {0,1}^n, {0,2}^n).
  static DensityTriple root(const CubeSet& S0);

  DensityTriple restricted(const Restriction& r) const;
  DensityTriple collapsed(const CollapseSpec& spec) const;
  DensityTriple refined(const CubeSet& f1, const CubeSet& f2) const;
  DensityTriple apply(const ProvenanceStep& step) const;

  bool same_sets(const DensityTriple& other) const { return S == other.S && E1 == other.E1 && E2 == other.E2; }
};

/// Replays the recorded steps from the root triple of S0.
DensityTriple replay(const CubeSet& S0, const std::vector<ProvenanceStep>& steps);

struct StructureReport {
  bool contained = false;
  bool density_ok = false;
  PseudoReport e1;
  PseudoReport e2;
  bool good = false;  // neither tester returned NOT
  bool member = false;
};

/// Law of pi1(x_i) (or pi2) for x uniform on [3]: (2/3, 1/3).
std::vector<double> side_law();

StructureReport check_structure(const DensityTriple& t, const Rational& alpha, const ParamSet& p, std::uint64_t seed);

struct PartitionEntry {
  Rational weight;
  DensityTriple triple;
};

struct PartitionState {
  std::vector<PartitionEntry> entries;
  Rational index;

  void recompute();
  Rational total_weight() const;
  /// Merges entries with identical (S, E1, E2); the first provenance is kept.
  void merge();
};

Rational partition_index(const PartitionState& ps);

class BucketShortfall : public std::runtime_error {
 public:
  BucketShortfall(const std::string& what, int groups, int size)
      : std::runtime_error(what), achievable_groups(groups), achievable_size(size) {}
  int achievable_groups;
  int achievable_size;
};

/// Disjoint groups, each inside one grid cell of width <= radius per coordinate.
std::vector<std::vector<std::size_t>> pigeonhole_buckets(const std::vector<std::vector<double>>& phases, int N,
                                                         int group_size, double radius);

/// Distance from t to the nearest integer.
double torus_norm(double t);

struct DirichletResult {
  std::optional<int> k;  // absent: no k <= k_max reaches eps
  double norm = 0;       // achieved norm for k, or the best over the scan
};

DirichletResult dirichlet_k(const std::vector<double>& v, int k_max, double eps);

struct RoundReport {
  PartitionState partition;
  int side = 0;  // 1 or 2: which set was not pseudorandom
  Rational index_before;
  Rational index_after;
  Rational drift_s;
  Rational drift_e1;
  Rational drift_e2;
  Rational drift_box;
  std::uint64_t z_count = 0;
  std::uint64_t z_correlated = 0;
  std::uint64_t shortfalls = 0;
  std::uint64_t no_k = 0;
  bool restriction_only = false;  // collapse output lowered the index; fell back to the plain restriction split
  bool strict_gain = false;
  bool asymptotic_gain = false;  // gain >= gamma^4 / 2
  nlohmann::json diagnostics;
};

/// One partition round of t driven by a NOT witness from check_structure.
RoundReport one_round_partition(const DensityTriple& t, const StructureReport& structure, const ParamSet& p,
                                std::uint64_t seed);

enum class UniformizeStatus { terminated, nonterminated, no_selection };
std::string_view to_string(UniformizeStatus s);

struct UniformizeResult {
  UniformizeStatus status = UniformizeStatus::terminated;
  DensityTriple selected;
  int rounds = 0;
  std::vector<Rational> index_trajectory;
  std::vector<Rational> weight_totals;
  std::vector<Rational> not_good_mass;
  Rational threshold;
  bool index_monotone = true;
  bool index_strict = true;
  PartitionState final_partition;
  nlohmann::json diagnostics;
};

UniformizeResult uniformize(const DensityTriple& t, const Rational& alpha, const ParamSet& p, int round_cap,
                            std::uint64_t seed);

struct IncrementOutcome {
  enum class Kind { line_found, new_triple, diagnostic };
  Kind kind = Kind::diagnostic;
  std::optional<LineTemplate> line;    // in the triple's own coordinates
  std::optional<LineTemplate> lifted;  // in root coordinates
  std::optional<DensityTriple> triple;
  nlohmann::json diagnostics;
};

std::string_view to_string(IncrementOutcome::Kind k);

IncrementOutcome increment_step(const DensityTriple& t, const ParamSet& p, std::uint64_t seed);

/// E over mu2 x-columns of |omega - delta1^2 delta2^2|, exact enumeration (n <= 6).
double omega_deviation(const DensityTriple& t);

struct DriverResult {
  std::vector<nlohmann::json> trace;
  IncrementOutcome::Kind outcome = IncrementOutcome::Kind::diagnostic;
  bool hit_cap = false;
  std::optional<LineTemplate> line;  // root coordinates
  bool line_verified = false;
  bool provenance_ok = true;
};

DriverResult main_driver(const CubeSet& S0, const ParamSet& p, int step_cap, std::uint64_t seed);

/// True iff the three points of line (root coordinates) lie in S0 and form a line.
bool verify_lifted_line(const CubeSet& S0, const LineTemplate& line);

}  // namespace dhjlab
