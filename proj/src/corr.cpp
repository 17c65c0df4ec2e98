#include "dhjlab/corr.hpp"

#include "dhjlab/errors.hpp"
#include "dhjlab/parallel.hpp"
#include "dhjlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

namespace dhjlab {

namespace {

std::uint64_t ipow(std::uint64_t b, int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

Complex unit(double phase) { return std::polar(1.0, 2 * std::numbers::pi * phase); }

}  // namespace

std::size_t FunctionTable::symbol_index(std::uint8_t s) const {
  auto it = std::find(alphabet.begin(), alphabet.end(), s);
  if (it == alphabet.end()) throw InvalidArgument("symbol outside the function's alphabet");
  return static_cast<std::size_t>(it - alphabet.begin());
}

Complex FunctionTable::at(std::span<const std::uint8_t> word) const {
  if (static_cast<int>(word.size()) != n) throw InvalidArgument("word length differs from n");
  std::uint64_t idx = 0;
  for (auto s : word) idx = idx * q() + symbol_index(s);
  return values[idx];
}

bool FunctionTable::is_real() const {
  return std::all_of(values.begin(), values.end(), [](const Complex& c) { return c.imag() == 0; });
}

double FunctionTable::max_modulus() const {
  double m = 0;
  for (const auto& v : values) m = std::max(m, std::abs(v));
  return m;
}

FunctionTable FunctionTable::constant(int n, Alphabet alphabet, Complex c) {
  FunctionTable f;
  f.n = n;
  f.alphabet = std::move(alphabet);
  f.values.assign(ipow(f.alphabet.size(), n), c);
  return f;
}

FunctionTable FunctionTable::indicator(const CubeSet& set, double shift) {
  FunctionTable f;
  f.n = set.dim();
  switch (set.side()) {
    case Side::full: f.alphabet = {0, 1, 2}; break;
    case Side::zero_one: f.alphabet = {0, 1}; break;
    case Side::zero_two: f.alphabet = {0, 2}; break;
  }
  // cell order of a CubeSet matches the table order for every side
  f.values.resize(set.cells());
  for (std::uint64_t c = 0; c < set.cells(); ++c) f.values[c] = (set.has_cell(c) ? 1.0 : 0.0) - shift;
  return f;
}

FunctionTable restrict_table(const FunctionTable& f, const Restriction& r) {
  if (r.n != f.n) throw InvalidArgument("restriction dimension differs from the function");
  const std::uint64_t q = f.q();
  std::uint64_t base = 0;
  for (std::size_t k = 0; k < r.I.size(); ++k) base += f.symbol_index(r.z[k]) * ipow(q, f.n - 1 - r.I[k]);
  const auto surv = r.survivors();
  const int m = static_cast<int>(surv.size());
  std::vector<std::uint64_t> weights;
  for (int c : surv) weights.push_back(ipow(q, f.n - 1 - c));
  FunctionTable out;
  out.n = m;
  out.alphabet = f.alphabet;
  out.values.resize(ipow(q, m));
  std::vector<std::uint64_t> digits(m, 0);
  std::uint64_t src = base;
  for (std::uint64_t cell = 0; cell < out.values.size(); ++cell) {
    out.values[cell] = f.values[src];
    int k = m - 1;
    while (k >= 0 && digits[k] + 1 == q) {
      src -= digits[k] * weights[k];
      digits[k] = 0;
      --k;
    }
    if (k < 0) break;
    ++digits[k];
    src += weights[k];
  }
  return out;
}

Complex ProductFunction::eval(std::span<const std::uint8_t> word) const {
  Complex v = 1;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    auto it = std::find(alphabet.begin(), alphabet.end(), word[i]);
    if (it == alphabet.end()) throw InvalidArgument("symbol outside the product function's alphabet");
    v *= factors[i][static_cast<std::size_t>(it - alphabet.begin())];
  }
  return v;
}

std::vector<std::vector<double>> ProductFunction::phases() const {
  std::vector<std::vector<double>> out;
  for (const auto& f : factors) {
    std::vector<double> v;
    for (const auto& c : f) {
      double t = std::abs(c) == 0 ? 0.0 : std::arg(c) / (2 * std::numbers::pi);
      t -= std::floor(t);
      if (t >= 1) t = 0;
      v.push_back(t);
    }
    out.push_back(std::move(v));
  }
  return out;
}

ProductFunction ProductFunction::from_phases(Alphabet alphabet, const std::vector<std::vector<double>>& phases) {
  ProductFunction p;
  p.alphabet = std::move(alphabet);
  for (const auto& v : phases) {
    if (v.size() != p.alphabet.size()) throw InvalidArgument("one phase per symbol required");
    std::vector<Complex> f;
    for (double t : v) f.push_back(unit(t));
    p.factors.push_back(std::move(f));
  }
  return p;
}

namespace {

void check_law(const FunctionTable& f, std::span<const double> law) {
  if (law.size() != f.q()) throw InvalidArgument("law must give one mass per alphabet symbol");
  double total = 0;
  for (double w : law) {
    if (w < 0) throw InvalidArgument("negative mass in law");
    total += w;
  }
  if (std::abs(total - 1) > 1e-9) throw InvalidArgument("law masses must sum to 1");
}

// f(x) * prod_i law(x_i)
std::vector<Complex> weighted(const FunctionTable& f, std::span<const double> law) {
  const std::size_t q = f.q();
  std::vector<double> w(1, 1.0);
  for (int i = 0; i < f.n; ++i) {
    std::vector<double> next(w.size() * q);
    for (std::size_t p = 0; p < w.size(); ++p) {
      for (std::size_t a = 0; a < q; ++a) next[p * q + a] = w[p] * law[a];
    }
    w = std::move(next);
  }
  std::vector<Complex> h(f.values.size());
  for (std::size_t x = 0; x < h.size(); ++x) h[x] = f.values[x] * w[x];
  return h;
}

// contracts the trailing modes of t (currently len entries) down to keep_modes modes
void contract_tail(std::vector<Complex>& t, std::size_t& len, std::size_t q, const ProductFunction& p, int first_mode,
                   int last_mode) {
  for (int m = last_mode; m >= first_mode; --m) {
    const auto& factor = p.factors[m];
    const std::size_t next = len / q;
    for (std::size_t i = 0; i < next; ++i) {
      Complex s = 0;
      for (std::size_t b = 0; b < q; ++b) s += t[i * q + b] * factor[b];
      t[i] = s;
    }
    len = next;
  }
}

}  // namespace

Complex correlate(const FunctionTable& f, const ProductFunction& p, std::span<const double> law) {
  check_law(f, law);
  if (p.dim() != f.n) throw InvalidArgument("product function dimension differs from f");
  auto t = weighted(f, law);
  std::size_t len = t.size();
  contract_tail(t, len, f.q(), p, 0, f.n - 1);
  return t[0];
}

// ---------------------------------------------------------------------------

namespace {

struct Template {
  std::vector<std::uint64_t> places;  // per function: place value of coordinate c
};

void check_template_budget(std::size_t rows, int n, double budget) {
  const double work = std::pow(static_cast<double>(rows), n);
  if (work > budget) {
    throw FallbackToSampling("exact enumeration needs " + std::to_string(work) + " templates", work);
  }
}

}  // namespace

CorrelationReport kwise_correlation(std::span<const FunctionTable> fs, const JointDist& d, CorrMode mode,
                                    double budget, std::uint64_t samples, std::uint64_t seed) {
  const std::size_t k = d.arity();
  if (fs.size() != k) throw InvalidArgument("one function per coordinate of D required");
  const int n = fs[0].n;
  for (const auto& f : fs) {
    if (f.n != n) throw InvalidArgument("functions must share n");
  }
  const auto& rows = d.rows();
  const std::size_t r = rows.size();
  // digit of row j in function i
  std::vector<std::vector<std::uint64_t>> digit(r, std::vector<std::uint64_t>(k));
  for (std::size_t j = 0; j < r; ++j) {
    for (std::size_t i = 0; i < k; ++i) digit[j][i] = fs[i].symbol_index(rows[j].t[i]);
  }
  std::vector<double> prob(r);
  for (std::size_t j = 0; j < r; ++j) prob[j] = to_double(rows[j].p);

  bool exact = mode == CorrMode::exact;
  if (mode == CorrMode::automatic) exact = std::pow(static_cast<double>(r), n) <= budget;
  CorrelationReport rep;
  if (exact) {
    check_template_budget(r, n, budget);
    std::vector<std::vector<std::uint64_t>> idx(n + 1, std::vector<std::uint64_t>(k, 0));
    std::vector<double> w(n + 1, 1.0);
    Complex total = 0;
    // depth-first over coordinates; idx[c] holds partial indices after c coordinates
    auto dfs = [&](auto&& self, int c) -> void {
      if (c == n) {
        Complex v = w[c];
        for (std::size_t i = 0; i < k; ++i) v *= fs[i].values[idx[c][i]];
        total += v;
        return;
      }
      for (std::size_t j = 0; j < r; ++j) {
        for (std::size_t i = 0; i < k; ++i) idx[c + 1][i] = idx[c][i] * fs[i].q() + digit[j][i];
        w[c + 1] = w[c] * prob[j];
        self(self, c + 1);
      }
    };
    dfs(dfs, 0);
    rep.value = total;
    rep.method = "exact";
  } else {
    Rng rng(seed);
    Complex sum = 0;
    double sq = 0;
    std::vector<std::uint64_t> idx(k);
    for (std::uint64_t s = 0; s < samples; ++s) {
      std::fill(idx.begin(), idx.end(), 0);
      for (int c = 0; c < n; ++c) {
        const std::size_t j = rng.pick(prob);
        for (std::size_t i = 0; i < k; ++i) idx[i] = idx[i] * fs[i].q() + digit[j][i];
      }
      Complex v = 1;
      for (std::size_t i = 0; i < k; ++i) v *= fs[i].values[idx[i]];
      sum += v;
      sq += std::norm(v);
    }
    const double m = static_cast<double>(samples);
    rep.value = sum / m;
    const double var = std::max(0.0, sq / m - std::norm(rep.value));
    rep.stderr_ = std::sqrt(var / m);
    rep.samples = samples;
    rep.method = "monte-carlo";
  }
  rep.magnitude = std::abs(rep.value);
  return rep;
}

Rational set_correlation(std::span<const CubeSet> sets, const JointDist& d, double budget) {
  const std::size_t k = d.arity();
  if (sets.size() != k) throw InvalidArgument("one set per coordinate of D required");
  const int n = sets[0].dim();
  for (const auto& s : sets) {
    if (s.dim() != n) throw InvalidArgument("sets must share n");
  }
  const auto& rows = d.rows();
  const std::size_t r = rows.size();
  check_template_budget(r, n, budget);

  std::vector<std::vector<std::uint64_t>> digit(r, std::vector<std::uint64_t>(k));
  std::vector<std::uint64_t> radix(k);
  for (std::size_t i = 0; i < k; ++i) {
    radix[i] = sets[i].side() == Side::full ? 3 : 2;
    for (std::size_t j = 0; j < r; ++j) {
      const std::uint8_t s = rows[j].t[i];
      if (sets[i].side() == Side::full) digit[j][i] = s;
      else digit[j][i] = s == sets[i].side_symbol() ? 1 : 0;
    }
  }
  // templates with the same row counts carry the same weight; count them per class
  const std::uint64_t base = static_cast<std::uint64_t>(n) + 1;
  std::vector<std::uint64_t> key_place(r, 0);
  {
    std::uint64_t p = 1;
    for (std::size_t j = 0; j + 1 < r; ++j) {
      key_place[j] = p;
      p *= base;
    }
  }
  std::unordered_map<std::uint64_t, std::uint64_t> classes;
  std::vector<std::vector<std::uint64_t>> idx(n + 1, std::vector<std::uint64_t>(k, 0));
  std::vector<std::uint64_t> key(n + 1, 0);
  auto dfs = [&](auto&& self, int c) -> void {
    if (c == n) {
      for (std::size_t i = 0; i < k; ++i) {
        if (!sets[i].has_cell(idx[c][i])) return;
      }
      ++classes[key[c]];
      return;
    }
    for (std::size_t j = 0; j < r; ++j) {
      for (std::size_t i = 0; i < k; ++i) idx[c + 1][i] = idx[c][i] * radix[i] + digit[j][i];
      key[c + 1] = key[c] + key_place[j];
      self(self, c + 1);
    }
  };
  dfs(dfs, 0);

  Rational total = 0;
  for (const auto& [cls, count] : classes) {
    std::uint64_t rest = cls;
    int used = 0;
    Rational w = 1;
    for (std::size_t j = 0; j + 1 < r; ++j) {
      const int cj = static_cast<int>(rest % base);
      rest /= base;
      used += cj;
      w *= pow(rows[j].p, cj);
    }
    w *= pow(rows[r - 1].p, n - used);
    total += Rational(BigInt(std::to_string(count))) * w;
  }
  return total;
}

Rational line_density(const CubeSet& set, const JointDist& xi_line) {
  if (xi_line.arity() != 3) throw InvalidArgument("expected a law on (x, y, z)");
  for (const auto& row : xi_line.rows()) {
    const auto& t = row.t;
    const bool diag = t[0] == t[1] && t[1] == t[2];
    const bool step = t[0] == 0 && t[1] == 1 && t[2] == 2;
    if (!diag && !step) throw InvalidArgument("law charges a tuple that is not a line atom");
  }
  const CubeSet full = pullback(set);
  const CubeSet sets[] = {full, full, full};
  return set_correlation(sets, xi_line);
}

// ---------------------------------------------------------------------------

namespace {

struct Run {
  ProductFunction p;
  Complex value;
  std::uint64_t sweeps = 0;
  std::uint64_t updates = 0;
  std::uint64_t violations = 0;
  double max_decrease = 0;
  bool converged = false;
};

Run alternate(const std::vector<Complex>& h, int n, const Alphabet& alphabet, ProductFunction p, int max_sweeps,
              double tol, bool real_signs, std::vector<double>* trajectory) {
  const std::size_t q = alphabet.size();
  Run run;
  double previous_update = -1;
  double previous_sweep = -1;
  std::vector<Complex> lead, work;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    lead = h;
    std::size_t lead_len = h.size();
    Complex objective = 0;
    for (int i = 0; i < n; ++i) {
      work.assign(lead.begin(), lead.begin() + static_cast<std::ptrdiff_t>(lead_len));
      std::size_t len = lead_len;
      contract_tail(work, len, q, p, i + 1, n - 1);
      // work[0..q) = sum over the other coordinates, weighted by the law
      auto& factor = p.factors[i];
      for (std::size_t a = 0; a < q; ++a) {
        const Complex g = work[a];
        if (real_signs) {
          if (g.real() != 0) factor[a] = g.real() > 0 ? 1.0 : -1.0;
        } else if (std::abs(g) > 0) {
          factor[a] = std::conj(g) / std::abs(g);
        }
      }
      objective = 0;
      for (std::size_t a = 0; a < q; ++a) objective += work[a] * factor[a];
      const double mag = std::abs(objective);
      if (previous_update >= 0 && mag < previous_update - 1e-12) {
        ++run.violations;
        run.max_decrease = std::max(run.max_decrease, previous_update - mag);
      }
      previous_update = mag;
      ++run.updates;
      if (trajectory) trajectory->push_back(mag);
      // fold coordinate i into the leading tensor
      const std::size_t stride = lead_len / q;
      for (std::size_t rest = 0; rest < stride; ++rest) {
        Complex s = 0;
        for (std::size_t a = 0; a < q; ++a) s += lead[a * stride + rest] * factor[a];
        lead[rest] = s;
      }
      lead_len = stride;
    }
    run.sweeps = static_cast<std::uint64_t>(sweep) + 1;
    run.value = n == 0 ? h[0] : objective;
    const double mag = std::abs(run.value);
    if (previous_sweep >= 0 && mag - previous_sweep <= tol * std::max(1.0, mag)) {
      run.converged = true;
      break;
    }
    previous_sweep = mag;
    if (n == 0) {
      run.converged = true;
      break;
    }
  }
  run.p = std::move(p);
  return run;
}

ProductFunction random_start(int n, const Alphabet& alphabet, Rng& rng, bool real_signs) {
  ProductFunction p;
  p.alphabet = alphabet;
  for (int i = 0; i < n; ++i) {
    std::vector<Complex> f;
    for (std::size_t a = 0; a < alphabet.size(); ++a) {
      if (real_signs) f.emplace_back(rng.below(2) ? 1.0 : -1.0);
      else f.push_back(unit(rng.uniform()));
    }
    p.factors.push_back(std::move(f));
  }
  return p;
}

CorrelationReport grid_search(const FunctionTable& f, std::span<const double> law, const std::vector<Complex>& h,
                              int resolution) {
  const int n = f.n;
  const std::size_t q = f.q();
  if (n > 3) throw InvalidArgument("grid search is limited to n <= 3");
  if (resolution < 1) throw InvalidArgument("grid resolution must be positive");
  // coordinate 0 is solved in closed form; entry (1, 0) is pinned by the global phase
  const std::size_t free_entries = n >= 2 ? static_cast<std::size_t>(n - 1) * q - 1 : 0;
  const std::size_t tail = ipow(q, n - 1);
  std::vector<int> digits(free_entries, 0);
  ProductFunction p;
  p.alphabet = f.alphabet;
  p.factors.assign(n, std::vector<Complex>(q, 1.0));
  double best = -1;
  ProductFunction best_p = p;
  std::vector<Complex> tail_product(tail);
  while (true) {
    for (std::size_t e = 0; e < free_entries; ++e) {
      const std::size_t flat = e + 1;
      p.factors[1 + flat / q][flat % q] = unit(static_cast<double>(digits[e]) / resolution);
    }
    for (std::size_t rest = 0; rest < tail; ++rest) {
      Complex v = 1;
      std::size_t x = rest;
      for (int c = n - 1; c >= 1; --c) {
        v *= p.factors[c][x % q];
        x /= q;
      }
      tail_product[rest] = v;
    }
    double value = 0;
    std::vector<Complex> g(q, 0);
    for (std::size_t a = 0; a < q; ++a) {
      for (std::size_t rest = 0; rest < tail; ++rest) g[a] += h[a * tail + rest] * tail_product[rest];
      value += std::abs(g[a]);
    }
    if (value > best) {
      best = value;
      best_p = p;
      for (std::size_t a = 0; a < q; ++a) {
        if (std::abs(g[a]) > 0) best_p.factors[0][a] = std::conj(g[a]) / std::abs(g[a]);
      }
    }
    std::size_t e = 0;
    while (e < free_entries && ++digits[e] == resolution) digits[e++] = 0;
    if (e == free_entries) break;
  }
  CorrelationReport rep;
  rep.method = "grid";
  rep.value = correlate(f, best_p, law);
  rep.magnitude = std::abs(rep.value);
  rep.witness = best_p;
  double mean_abs = 0;
  for (std::size_t x = 0; x < h.size(); ++x) mean_abs += std::abs(h[x]);
  rep.gap_bound = (n - 1) * 2 * std::sin(std::numbers::pi / (2.0 * resolution)) * mean_abs;
  return rep;
}

}  // namespace

CorrelationReport max_product_correlation(const FunctionTable& f, std::span<const double> law,
                                          const MaxOptions& options) {
  check_law(f, law);
  if (f.max_modulus() > 1 + 1e-12) throw InvalidArgument("function must be 1-bounded");
  const auto h = weighted(f, law);
  if (options.method == MaxMethod::grid) return grid_search(f, law, h, options.grid_resolution);
  if (f.n > 16) throw InvalidArgument("alternating maximization needs n <= 16");

  CorrelationReport rep;
  rep.method = "alternating";
  rep.converged = true;
  double best = -1;
  const int restarts = std::max(1, options.restarts);
  for (int r = 0; r < restarts; ++r) {
    Rng rng(Rng::derive(options.seed, static_cast<std::uint64_t>(r)));
    Run run = alternate(h, f.n, f.alphabet, random_start(f.n, f.alphabet, rng, false), options.max_sweeps,
                        options.tol, false, options.trajectory);
    rep.sweeps += run.sweeps;
    rep.updates += run.updates;
    rep.monotone_violations += run.violations;
    rep.max_decrease = std::max(rep.max_decrease, run.max_decrease);
    rep.converged = rep.converged && run.converged;
    if (std::abs(run.value) > best) {
      best = std::abs(run.value);
      rep.value = run.value;
      rep.witness = std::move(run.p);
    }
  }
  rep.magnitude = std::abs(rep.value);

  if (options.real_witness && f.is_real()) {
    double best_real = -1;
    for (int r = 0; r < restarts; ++r) {
      Rng rng(Rng::derive(options.seed ^ 0x5eed5eedULL, static_cast<std::uint64_t>(r)));
      Run run = alternate(h, f.n, f.alphabet, random_start(f.n, f.alphabet, rng, true), options.max_sweeps,
                          options.tol, true, nullptr);
      if (std::abs(run.value) > best_real) {
        best_real = std::abs(run.value);
        rep.real_value = best_real;
        rep.real_witness = std::move(run.p);
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::pseudorandom: return "PSEUDORANDOM";
    case Verdict::not_pseudorandom: return "NOT";
    default: return "INCONCLUSIVE";
  }
}

const DeltaResult* PseudoReport::witness() const {
  const DeltaResult* out = nullptr;
  for (const auto& d : per_delta) {
    if (d.verdict == Verdict::not_pseudorandom && d.witness && (!out || d.best > out->best)) out = &d;
  }
  return out;
}

std::pair<double, double> wilson_interval(std::uint64_t hits, std::uint64_t trials, double z) {
  if (trials == 0) return {0, 1};
  const double t = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / t;
  const double z2 = z * z;
  const double denom = 1 + z2 / t;
  const double center = (p + z2 / (2 * t)) / denom;
  const double half = z / denom * std::sqrt(p * (1 - p) / t + z2 / (4 * t * t));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

std::vector<Rational> delta_grid(int n, int n_prime, double ratio) {
  if (n < 1) throw InvalidArgument("n must be positive");
  if (n_prime < 1) throw InvalidArgument("n' must be positive");
  if (ratio <= 1) throw InvalidArgument("grid ratio must exceed 1");
  std::vector<Rational> out;
  const Rational step(ratio);
  Rational d(n_prime, n);
  d.canonicalize();
  while (d < 1) {
    out.push_back(d);
    d *= step;
  }
  out.emplace_back(1);
  return out;
}

PseudoReport product_pseudorandom_test(const FunctionTable& f, int n_prime, double gamma, std::span<const double> law,
                                       const PseudoOptions& options) {
  if (gamma <= 0 || gamma >= 1) throw InvalidArgument("gamma must lie in (0, 1)");
  if (options.trials < 1) throw InvalidArgument("at least one trial required");
  check_law(f, law);
  PseudoReport report;
  report.n = f.n;
  report.n_prime = n_prime;
  report.gamma = gamma;
  if (f.max_modulus() == 0) {
    report.zero_function = true;
    report.verdict = Verdict::pseudorandom;
    return report;
  }
  if (f.n == 0) throw InvalidArgument("n must be positive");
  CoordLaw coord_law{Rational(0), Rational(0), Rational(0)};
  for (std::size_t a = 0; a < f.q(); ++a) coord_law[f.alphabet[a]] = Rational(law[a]);

  const auto grid = delta_grid(f.n, std::min(n_prime, f.n), options.ratio);
  bool all_pseudo = true;
  bool any_not = false;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    struct Trial {
      Restriction r;
      CorrelationReport c;
    };
    std::vector<Trial> trials(options.trials);
    const std::uint64_t grid_seed = Rng::derive(options.seed, g);
    parallel_for(options.trials, options.threads, [&](std::size_t t) {
      const std::uint64_t seed = Rng::derive(grid_seed, t);
      Restriction r = sample_restriction(f.n, grid[g], coord_law, seed);
      const auto restricted = restrict_table(f, r);
      MaxOptions mo;
      mo.restarts = options.restarts;
      mo.max_sweeps = options.max_sweeps;
      mo.tol = options.tol;
      mo.seed = Rng::derive(seed, 1);
      mo.real_witness = false;
      trials[t] = {std::move(r), max_product_correlation(restricted, law, mo)};
    });
    DeltaResult res;
    res.delta = grid[g];
    res.trials = options.trials;
    for (auto& t : trials) {
      if (t.c.magnitude >= gamma) ++res.exceed;
      if (t.c.magnitude > res.best || !res.witness) {
        res.best = t.c.magnitude;
        res.witness_restriction = t.r;
        res.witness = t.c.witness;
      }
    }
    res.fraction = static_cast<double>(res.exceed) / static_cast<double>(res.trials);
    std::tie(res.wilson_lo, res.wilson_hi) = wilson_interval(res.exceed, res.trials, options.wilson_z);
    if (res.wilson_lo >= gamma) res.verdict = Verdict::not_pseudorandom;
    else if (res.wilson_hi < gamma) res.verdict = Verdict::pseudorandom;
    else res.verdict = Verdict::inconclusive;
    any_not = any_not || res.verdict == Verdict::not_pseudorandom;
    all_pseudo = all_pseudo && res.verdict == Verdict::pseudorandom;
    report.per_delta.push_back(std::move(res));
  }
  report.verdict = any_not ? Verdict::not_pseudorandom : all_pseudo ? Verdict::pseudorandom : Verdict::inconclusive;
  return report;
}

}  // namespace dhjlab
