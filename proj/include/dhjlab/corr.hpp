#pragma once

#include "dhjlab/cube.hpp"
#include "dhjlab/dist.hpp"
#include "dhjlab/restrict.hpp"

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dhjlab {

using Complex = std::complex<double>;

/// A function Sigma^n -> C stored in base-|Sigma| index order, coordinate 1 most significant.
struct FunctionTable {
  int n = 0;
  Alphabet alphabet{0, 1, 2};
  std::vector<Complex> values;

  std::size_t q() const { return alphabet.size(); }
  std::size_t symbol_index(std::uint8_t s) const;
  Complex at(std::span<const std::uint8_t> word) const;
  bool is_real() const;
  double max_modulus() const;

  static FunctionTable constant(int n, Alphabet alphabet, Complex c);
  /// 1_E - shift over the set's own alphabet: {0,1,2}, {0,1} or {0,2}.
  static FunctionTable indicator(const CubeSet& set, double shift = 0);
};

FunctionTable restrict_table(const FunctionTable& f, const Restriction& r);

/// P(x) = prod_i P_i(x_i) with |P_i| <= 1.
struct ProductFunction {
  Alphabet alphabet;
  std::vector<std::vector<Complex>> factors;  // factors[i][a] is P_i(alphabet[a])

  int dim() const { return static_cast<int>(factors.size()); }
  Complex eval(std::span<const std::uint8_t> word) const;
  /// v_i(a) in [0,1) with P_i(a) = exp(2 pi i v_i(a)); entries of modulus 0 map to 0.
  std::vector<std::vector<double>> phases() const;
  static ProductFunction from_phases(Alphabet alphabet, const std::vector<std::vector<double>>& phases);
};

/// E_{x ~ law^n}[f(x) P(x)], law given over f's alphabet.
Complex correlate(const FunctionTable& f, const ProductFunction& p, std::span<const double> law);

struct CorrelationReport {
  Complex value;
  double magnitude = 0;
  std::string method;  // "exact", "monte-carlo", "alternating", "grid"
  std::uint64_t samples = 0;
  double stderr_ = 0;
  std::optional<ProductFunction> witness;
  // maximizer diagnostics
  bool converged = true;
  std::uint64_t sweeps = 0;
  std::uint64_t updates = 0;
  std::uint64_t monotone_violations = 0;
  double max_decrease = 0;
  double gap_bound = 0;  // grid only: the optimum exceeds magnitude by at most this
  std::optional<double> real_value;
  std::optional<ProductFunction> real_witness;
};

enum class CorrMode { exact, monte_carlo, automatic };

/// E_{(x_1..x_k) ~ D^n}[f_1(x_1) ... f_k(x_k)].
///
/// Exact mode enumerates |supp D|^n templates and throws FallbackToSampling
/// above budget; automatic falls back to sampling instead.
CorrelationReport kwise_correlation(std::span<const FunctionTable> fs, const JointDist& d, CorrMode mode,
                                    double budget = 1e8, std::uint64_t samples = 100000, std::uint64_t seed = 0);

/// E_{D^n}[1_{S_1}(x_1) ... 1_{S_k}(x_k)] exactly. One-sided sets are read through pi1/pi2.
Rational set_correlation(std::span<const CubeSet> sets, const JointDist& d, double budget = 1e8);

/// sum over templates in {000,111,222,012}^n of prod weights * [all three points in S].
Rational line_density(const CubeSet& set, const JointDist& xi_line);

enum class MaxMethod { alternating, grid };

struct MaxOptions {
  MaxMethod method = MaxMethod::alternating;
  int restarts = 8;
  int max_sweeps = 500;
  double tol = 1e-12;
  std::uint64_t seed = 0;
  int grid_resolution = 16;
  bool real_witness = true;
  std::vector<double>* trajectory = nullptr;  // objective after every coordinate update
};

/// Heuristic (alternating) or certified-lower-bound (grid) maximum of |E[f P]| over product functions P.
CorrelationReport max_product_correlation(const FunctionTable& f, std::span<const double> law, const MaxOptions& options);

enum class Verdict { pseudorandom, not_pseudorandom, inconclusive };
std::string_view to_string(Verdict v);

struct DeltaResult {
  Rational delta;
  std::uint64_t trials = 0;
  std::uint64_t exceed = 0;
  double fraction = 0;
  double wilson_lo = 0;
  double wilson_hi = 0;
  Verdict verdict = Verdict::inconclusive;
  double best = 0;
  std::optional<Restriction> witness_restriction;
  std::optional<ProductFunction> witness;
};

struct PseudoOptions {
  std::uint64_t trials = 20;
  int restarts = 4;
  int max_sweeps = 200;
  double tol = 1e-10;
  double ratio = 2;
  double wilson_z = 1.96;
  int threads = 1;
  std::uint64_t seed = 0;
};

struct PseudoReport {
  Verdict verdict = Verdict::inconclusive;
  bool zero_function = false;
  int n = 0;
  int n_prime = 0;
  double gamma = 0;
  std::vector<DeltaResult> per_delta;

  /// The NOT entry with the strongest witness, if any.
  const DeltaResult* witness() const;
};

std::pair<double, double> wilson_interval(std::uint64_t hits, std::uint64_t trials, double z);

/// Geometric grid n'/n, 2n'/n, ... capped by 1 (1 always included).
std::vector<Rational> delta_grid(int n, int n_prime, double ratio);

PseudoReport product_pseudorandom_test(const FunctionTable& f, int n_prime, double gamma, std::span<const double> law,
                                       const PseudoOptions& options);

}  // namespace dhjlab
