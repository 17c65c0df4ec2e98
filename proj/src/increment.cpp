#include "dhjlab/increment.hpp"

#include "dhjlab/dist.hpp"
#include "dhjlab/errors.hpp"
#include "dhjlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace dhjlab {

using nlohmann::json;

namespace {

std::string q(const Rational& r) { return to_string(r); }

Rational from_json_rational(const json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long>());
  throw InvalidArgument("expected a rational written as a string");
}

std::uint64_t ipow3(std::size_t e) { return pow3(static_cast<int>(e)); }

}  // namespace

// ---------------------------------------------------------------------------
// ParamSet

void ParamSet::validate() const {
  if (alpha < 0 || alpha > 1) throw InvalidArgument("alpha must lie in [0, 1]");
  if (tau <= 0 || tau_tilde <= 0) throw InvalidArgument("tau and tau~ must be positive");
  if (gamma <= 0 || gamma >= 1 || gamma_prime <= 0 || gamma_prime >= 1) throw InvalidArgument("gamma must lie in (0, 1)");
  for (double e : {zeta, dirichlet_exponent, radius_exponent, quality_exponent, n_prime_exponent}) {
    if (e <= 0 || e >= 1) throw InvalidArgument("exponents must lie in (0, 1)");
  }
  ChainParams::make(K, eta_prime, eta, 1, Rational(1, 2));
  if (groups < 1 || group_size < 1 || k_max < 1) throw InvalidArgument("group settings must be positive");
  if (radius <= 0 || radius > 1 || eps <= 0) throw InvalidArgument("radius and eps must be positive");
  if (tester_trials < 1 || tester_restarts < 1 || threads < 1) throw InvalidArgument("tester settings must be positive");
  if (increment_samples < 1 || balanced_rounds < 1) throw InvalidArgument("sample counts must be positive");
}

int ParamSet::n_prime(int n) const {
  return std::max(1, static_cast<int>(std::ceil(std::pow(static_cast<double>(n), n_prime_exponent) - 1e-12)));
}
int ParamSet::group_count(int m) const {
  return desk ? groups : std::max(1, static_cast<int>(std::ceil(std::pow(m, zeta))));
}
int ParamSet::group_size_for(int m) const {
  return desk ? group_size : std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(m)) / 2)));
}
double ParamSet::radius_for(int m) const { return desk ? radius : std::pow(m, -radius_exponent); }
int ParamSet::k_max_for(int m) const {
  return desk ? k_max : std::max(1, static_cast<int>(std::ceil(std::pow(m, dirichlet_exponent))));
}
double ParamSet::eps_for(int m) const { return desk ? eps : std::pow(m, -quality_exponent); }

json to_json(const ParamSet& p) {
  return json{{"alpha", q(p.alpha)},
              {"tau", q(p.tau)},
              {"tau_tilde", q(p.tau_tilde)},
              {"gamma", p.gamma},
              {"gamma_prime", p.gamma_prime},
              {"K", p.K},
              {"eta", q(p.eta)},
              {"eta_prime", q(p.eta_prime)},
              {"zeta", p.zeta},
              {"dirichlet_exponent", p.dirichlet_exponent},
              {"radius_exponent", p.radius_exponent},
              {"quality_exponent", p.quality_exponent},
              {"n_prime_exponent", p.n_prime_exponent},
              {"desk", p.desk},
              {"groups", p.groups},
              {"group_size", p.group_size},
              {"radius", p.radius},
              {"eps", p.eps},
              {"k_max", p.k_max},
              {"tester_trials", p.tester_trials},
              {"tester_restarts", p.tester_restarts},
              {"threads", p.threads},
              {"z_cap", p.z_cap},
              {"u_cap", p.u_cap},
              {"balanced_rounds", p.balanced_rounds},
              {"increment_samples", p.increment_samples}};
}

ParamSet param_set_from_json(const json& j) {
  ParamSet p;
  for (const auto& [key, value] : j.items()) {
    if (key == "alpha") p.alpha = from_json_rational(value);
    else if (key == "tau") p.tau = from_json_rational(value);
    else if (key == "tau_tilde") p.tau_tilde = from_json_rational(value);
    else if (key == "gamma") p.gamma = value.get<double>();
    else if (key == "gamma_prime") p.gamma_prime = value.get<double>();
    else if (key == "K") p.K = value.get<unsigned>();
    else if (key == "eta") p.eta = from_json_rational(value);
    else if (key == "eta_prime") p.eta_prime = from_json_rational(value);
    else if (key == "zeta") p.zeta = value.get<double>();
    else if (key == "dirichlet_exponent") p.dirichlet_exponent = value.get<double>();
    else if (key == "radius_exponent") p.radius_exponent = value.get<double>();
    else if (key == "quality_exponent") p.quality_exponent = value.get<double>();
    else if (key == "n_prime_exponent") p.n_prime_exponent = value.get<double>();
    else if (key == "desk") p.desk = value.get<bool>();
    else if (key == "groups") p.groups = value.get<int>();
    else if (key == "group_size") p.group_size = value.get<int>();
    else if (key == "radius") p.radius = value.get<double>();
    else if (key == "eps") p.eps = value.get<double>();
    else if (key == "k_max") p.k_max = value.get<int>();
    else if (key == "tester_trials") p.tester_trials = value.get<std::uint64_t>();
    else if (key == "tester_restarts") p.tester_restarts = value.get<int>();
    else if (key == "threads") p.threads = value.get<int>();
    else if (key == "z_cap") p.z_cap = value.get<std::uint64_t>();
    else if (key == "u_cap") p.u_cap = value.get<std::uint64_t>();
    else if (key == "balanced_rounds") p.balanced_rounds = value.get<int>();
    else if (key == "increment_samples") p.increment_samples = value.get<int>();
    else throw InvalidArgument("unknown parameter " + key);
  }
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------
// DensityTriple

DensityTriple DensityTriple::make(CubeSet S, CubeSet E1, CubeSet E2) {
  if (S.side() != Side::full || E1.side() != Side::zero_one || E2.side() != Side::zero_two) {
    throw InvalidArgument("triple needs a full S, a zero-one E1 and a zero-two E2");
  }
  if (S.dim() != E1.dim() || S.dim() != E2.dim()) throw InvalidArgument("triple dimensions differ");
  const CubeSet box = disjoint_product(E1, E2);
  if (!S.subset_of(box)) throw InvalidArgument("S is not contained in E1 box E2");
  DensityTriple t;
  t.mu_s = uniform_measure(S);
  t.mu_box = uniform_measure(box);
  t.alpha = t.mu_box == 0 ? Rational(0) : Rational(t.mu_s / t.mu_box);
  t.delta1 = uniform_measure(E1);
  t.delta2 = uniform_measure(E2);
  t.S = std::move(S);
  t.E1 = std::move(E1);
  t.E2 = std::move(E2);
  t.embedding = Embedding::identity(t.S.dim());
  return t;
}

DensityTriple DensityTriple::root(const CubeSet& S0) {
  if (S0.side() != Side::full) throw InvalidArgument("root set must be a full-side set");
  return make(S0, CubeSet::full(S0.dim(), Side::zero_one), CubeSet::full(S0.dim(), Side::zero_two));
}

DensityTriple DensityTriple::apply(const ProvenanceStep& step) const {
  DensityTriple out;
  switch (step.kind) {
    case ProvenanceStep::Kind::restrict:
      out = make(restrict_set(S, step.restriction), restrict_set(E1, restriction_for_side(step.restriction, Side::zero_one)),
                 restrict_set(E2, restriction_for_side(step.restriction, Side::zero_two)));
      out.embedding = embedding.after_restriction(step.restriction);
      break;
    case ProvenanceStep::Kind::collapse:
      out = make(collapse_eq(S, step.collapse), collapse_eq(E1, step.collapse), collapse_eq(E2, step.collapse));
      out.embedding = embedding.after_collapse(step.collapse);
      break;
    case ProvenanceStep::Kind::refine: {
      CubeSet e1 = E1.intersect(step.f1);
      CubeSet e2 = E2.intersect(step.f2);
      CubeSet s = S.intersect(disjoint_product(e1, e2));
      out = make(std::move(s), std::move(e1), std::move(e2));
      out.embedding = embedding;
      break;
    }
  }
  out.provenance = provenance;
  out.provenance.push_back(step);
  return out;
}

DensityTriple DensityTriple::restricted(const Restriction& r) const {
  ProvenanceStep step;
  step.kind = ProvenanceStep::Kind::restrict;
  step.restriction = r;
  return apply(step);
}

DensityTriple DensityTriple::collapsed(const CollapseSpec& spec) const {
  ProvenanceStep step;
  step.kind = ProvenanceStep::Kind::collapse;
  step.collapse = spec;
  return apply(step);
}

DensityTriple DensityTriple::refined(const CubeSet& f1, const CubeSet& f2) const {
  ProvenanceStep step;
  step.kind = ProvenanceStep::Kind::refine;
  step.f1 = f1;
  step.f2 = f2;
  return apply(step);
}

DensityTriple replay(const CubeSet& S0, const std::vector<ProvenanceStep>& steps) {
  DensityTriple t = DensityTriple::root(S0);
  for (const auto& s : steps) t = t.apply(s);
  return t;
}

// ---------------------------------------------------------------------------
// Structure

std::vector<double> side_law() { return {2.0 / 3.0, 1.0 / 3.0}; }

StructureReport check_structure(const DensityTriple& t, const Rational& alpha, const ParamSet& p, std::uint64_t seed) {
  StructureReport rep;
  rep.contained = t.S.subset_of(disjoint_product(t.E1, t.E2));
  rep.density_ok = t.mu_s >= alpha * t.mu_box;
  const auto law = side_law();
  PseudoOptions opt;
  opt.trials = p.tester_trials;
  opt.restarts = p.tester_restarts;
  opt.threads = p.threads;
  const int n_prime = p.n_prime(std::max(1, t.dim()));
  opt.seed = Rng::derive(seed, 1);
  rep.e1 = product_pseudorandom_test(FunctionTable::indicator(t.E1, to_double(t.delta1)), n_prime, p.gamma, law, opt);
  opt.seed = Rng::derive(seed, 2);
  rep.e2 = product_pseudorandom_test(FunctionTable::indicator(t.E2, to_double(t.delta2)), n_prime, p.gamma, law, opt);
  rep.good = rep.e1.verdict != Verdict::not_pseudorandom && rep.e2.verdict != Verdict::not_pseudorandom;
  rep.member = rep.contained && rep.density_ok && rep.good;
  return rep;
}

// ---------------------------------------------------------------------------
// Partitions

void PartitionState::recompute() { index = partition_index(*this); }

Rational PartitionState::total_weight() const {
  Rational w = 0;
  for (const auto& e : entries) w += e.weight;
  return w;
}

void PartitionState::merge() {
  std::vector<PartitionEntry> out;
  for (auto& e : entries) {
    auto it = std::find_if(out.begin(), out.end(), [&](const PartitionEntry& o) { return o.triple.same_sets(e.triple); });
    if (it == out.end()) out.push_back(std::move(e));
    else it->weight += e.weight;
  }
  entries = std::move(out);
}

Rational partition_index(const PartitionState& ps) {
  Rational index = 0;
  for (const auto& e : ps.entries) {
    if (e.weight <= 0) throw InvalidArgument("partition weights must be positive");
    index += e.weight * (e.triple.delta1 * e.triple.delta1 + e.triple.delta2 * e.triple.delta2);
  }
  return index;
}

double torus_norm(double t) { return std::abs(t - std::round(t)); }

std::vector<std::vector<std::size_t>> pigeonhole_buckets(const std::vector<std::vector<double>>& phases, int N,
                                                         int group_size, double radius) {
  if (N < 1 || group_size < 1) throw InvalidArgument("group count and size must be positive");
  if (radius <= 0) throw InvalidArgument("radius must be positive");
  const int cells = static_cast<int>(std::ceil(1.0 / radius - 1e-12));
  std::map<std::vector<int>, std::vector<std::size_t>> buckets;
  for (std::size_t j = 0; j < phases.size(); ++j) {
    std::vector<int> key;
    for (double v : phases[j]) {
      double t = v - std::floor(v);
      key.push_back(std::min(cells - 1, static_cast<int>(t * cells)));
    }
    buckets[key].push_back(j);
  }
  std::vector<const std::vector<std::size_t>*> order;
  for (const auto& [key, members] : buckets) order.push_back(&members);
  std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->size() > b->size(); });
  std::vector<std::vector<std::size_t>> groups;
  for (const auto* members : order) {
    for (std::size_t s = 0; s + group_size <= members->size() && static_cast<int>(groups.size()) < N; s += group_size) {
      groups.emplace_back(members->begin() + static_cast<std::ptrdiff_t>(s),
                          members->begin() + static_cast<std::ptrdiff_t>(s + group_size));
    }
  }
  if (static_cast<int>(groups.size()) < N) {
    const int largest = order.empty() ? 0 : static_cast<int>(order.front()->size());
    throw BucketShortfall("only " + std::to_string(groups.size()) + " groups of size " + std::to_string(group_size) +
                              " available",
                          static_cast<int>(groups.size()), largest);
  }
  return groups;
}

DirichletResult dirichlet_k(const std::vector<double>& v, int k_max, double eps) {
  if (k_max < 1) throw InvalidArgument("k_max must be at least 1");
  DirichletResult best;
  best.norm = 2;
  for (int k = 1; k <= k_max; ++k) {
    double norm = 0;
    for (double x : v) norm = std::max(norm, torus_norm(k * x));
    if (norm <= eps) return {k, norm};
    best.norm = std::min(best.norm, norm);
  }
  return best;
}

namespace {

// Every word of [3]^len when small enough, else balanced rounds of three
// draws in which each coordinate takes every symbol once.
std::vector<Word> assignments(std::size_t len, std::uint64_t cap, int rounds, Rng& rng) {
  std::vector<Word> out;
  if (ipow3(len) <= cap) {
    for (std::uint64_t i = 0; i < ipow3(len); ++i) out.push_back(point_digits(i, static_cast<int>(len)));
    return out;
  }
  for (int r = 0; r < rounds; ++r) {
    Word base(len);
    for (auto& b : base) b = static_cast<std::uint8_t>(rng.below(3));
    for (std::uint8_t s = 0; s < 3; ++s) {
      Word w(len);
      for (std::size_t i = 0; i < len; ++i) w[i] = static_cast<std::uint8_t>((base[i] + s) % 3);
      out.push_back(std::move(w));
    }
  }
  return out;
}

struct Means {
  Rational s, e1, e2, box;
};

Means means(const PartitionState& ps) {
  Means m{0, 0, 0, 0};
  for (const auto& e : ps.entries) {
    m.s += e.weight * e.triple.mu_s;
    m.e1 += e.weight * e.triple.delta1;
    m.e2 += e.weight * e.triple.delta2;
    m.box += e.weight * e.triple.mu_box;
  }
  return m;
}

}  // namespace

RoundReport one_round_partition(const DensityTriple& t, const StructureReport& structure, const ParamSet& p,
                                std::uint64_t seed) {
  const DeltaResult* w1 = structure.e1.witness();
  const DeltaResult* w2 = structure.e2.witness();
  if (!w1 && !w2) throw InvalidArgument("no NOT witness: both sets passed the tester");
  RoundReport rep;
  rep.side = w1 ? 1 : 2;
  const DeltaResult* w = w1 ? w1 : w2;
  const std::vector<int> I = w->witness_restriction->I;
  const int n = t.dim();
  const int m = n - static_cast<int>(I.size());
  const CubeSet& E = rep.side == 1 ? t.E1 : t.E2;
  const double shift = to_double(rep.side == 1 ? t.delta1 : t.delta2);
  const Side side = rep.side == 1 ? Side::zero_one : Side::zero_two;
  const auto law = side_law();

  Rng rng(seed);
  const auto zs = assignments(I.size(), p.z_cap, p.balanced_rounds, rng);
  rep.z_count = zs.size();
  const Rational wz(1, static_cast<unsigned long>(zs.size()));

  PartitionState plain;     // restriction only
  PartitionState refined;   // with collapse and J restriction where z correlates
  const int N = p.group_count(m);
  const int size = p.group_size_for(m);
  const double radius = p.radius_for(m);
  const int k_max = p.k_max_for(m);
  const double eps = p.eps_for(m);
  json per_z = json::array();

  for (std::size_t zi = 0; zi < zs.size(); ++zi) {
    const Restriction r = make_restriction(n, I, zs[zi]);
    const DensityTriple tz = t.restricted(r);
    plain.entries.push_back({wz, tz});
    const CubeSet Ez = restrict_set(E, restriction_for_side(r, side));
    FunctionTable f = FunctionTable::indicator(Ez, shift);
    MaxOptions mo;
    mo.restarts = p.tester_restarts;
    mo.seed = Rng::derive(seed, 1000 + zi);
    mo.real_witness = false;
    const auto corr = max_product_correlation(f, law, mo);
    if (corr.magnitude < p.gamma || m == 0) {
      refined.entries.push_back({wz, tz});
      continue;
    }
    ++rep.z_correlated;
    // phases v_j normalized so that v_j(0) = 0
    auto phases = corr.witness->phases();
    for (auto& v : phases) {
      const double base = v[0];
      for (auto& x : v) {
        x -= base;
        x -= std::floor(x);
      }
    }
    std::vector<std::vector<std::size_t>> groups;
    try {
      groups = pigeonhole_buckets(phases, N, size, radius);
    } catch (const BucketShortfall& s) {
      ++rep.shortfalls;
      if (s.achievable_groups >= 1) groups = pigeonhole_buckets(phases, s.achievable_groups, size, radius);
      else groups = pigeonhole_buckets(phases, 1, std::max(1, s.achievable_size), radius);
    }
    CollapseSpec spec;
    std::vector<bool> in_t(m, false);
    json ks = json::array();
    for (const auto& g : groups) {
      const auto d = dirichlet_k(phases[g.front()], k_max, eps);
      if (!d.k) ++rep.no_k;
      const int k = std::min<int>(d.k.value_or(1), static_cast<int>(g.size()));
      ks.push_back(k);
      std::vector<std::size_t> members = g;
      rng.shuffle(members);
      std::vector<int> block;
      for (int i = 0; i < k; ++i) {
        block.push_back(static_cast<int>(members[i]));
        in_t[members[i]] = true;
      }
      std::sort(block.begin(), block.end());
      spec.blocks.push_back(std::move(block));
    }
    std::vector<int> J;
    for (int c = 0; c < m; ++c) {
      if (!in_t[c]) J.push_back(c);
    }
    const auto us = assignments(J.size(), p.u_cap, p.balanced_rounds, rng);
    // after restricting J the surviving coordinates are exactly the block members, renumbered
    std::vector<int> renumber(m, -1);
    int next = 0;
    for (int c = 0; c < m; ++c) {
      if (in_t[c]) renumber[c] = next++;
    }
    CollapseSpec local;
    for (const auto& b : spec.blocks) {
      std::vector<int> nb;
      for (int c : b) nb.push_back(renumber[c]);
      local.blocks.push_back(std::move(nb));
    }
    const Rational wu = wz / Rational(static_cast<unsigned long>(us.size()));
    for (const auto& u : us) {
      const DensityTriple tj = tz.restricted(make_restriction(m, J, u));
      refined.entries.push_back({wu, tj.collapsed(local)});
    }
    per_z.push_back({{"z", format_word(zs[zi])}, {"correlation", corr.magnitude}, {"groups", groups.size()},
                     {"k", ks}, {"J", J.size()}, {"u", us.size()}});
  }

  const Rational before = t.delta1 * t.delta1 + t.delta2 * t.delta2;
  plain.merge();
  plain.recompute();
  refined.merge();
  refined.recompute();
  rep.index_before = before;
  if (refined.index >= before && refined.index >= plain.index) {
    rep.partition = std::move(refined);
  } else {
    rep.restriction_only = true;
    rep.partition = std::move(plain);
  }
  rep.index_after = rep.partition.index;
  const Means mm = means(rep.partition);
  rep.drift_s = abs(mm.s - t.mu_s);
  rep.drift_e1 = abs(mm.e1 - t.delta1);
  rep.drift_e2 = abs(mm.e2 - t.delta2);
  rep.drift_box = abs(mm.box - t.mu_box);
  const Rational gain = rep.index_after - before;
  rep.strict_gain = gain > 0;
  rep.asymptotic_gain = to_double(gain) >= std::pow(p.gamma, 4) / 2;
  rep.diagnostics = {{"side", rep.side},
                     {"I", I},
                     {"m", m},
                     {"settings", {{"groups", N}, {"group_size", size}, {"radius", radius}, {"k_max", k_max}, {"eps", eps}}},
                     {"z_count", rep.z_count},
                     {"z_correlated", rep.z_correlated},
                     {"shortfalls", rep.shortfalls},
                     {"no_k", rep.no_k},
                     {"restriction_only", rep.restriction_only},
                     {"index_before", q(before)},
                     {"index_after", q(rep.index_after)},
                     {"gain", q(gain)},
                     {"strict_gain", rep.strict_gain},
                     {"asymptotic_gain", rep.asymptotic_gain},
                     {"drift", {{"S", q(rep.drift_s)}, {"E1", q(rep.drift_e1)}, {"E2", q(rep.drift_e2)}, {"box", q(rep.drift_box)}}},
                     {"n_to_minus_c", std::pow(std::max(1, n), -1.0 / 1000)},
                     {"per_z", per_z}};
  return rep;
}

// ---------------------------------------------------------------------------
// Uniformization

std::string_view to_string(UniformizeStatus s) {
  switch (s) {
    case UniformizeStatus::terminated: return "TERMINATED";
    case UniformizeStatus::nonterminated: return "NONTERMINATED";
    default: return "NO_SELECTION";
  }
}

UniformizeResult uniformize(const DensityTriple& t, const Rational& alpha, const ParamSet& p, int round_cap,
                            std::uint64_t seed) {
  UniformizeResult res;
  res.threshold = t.mu_box * p.tau / 100;
  PartitionState state;
  state.entries.push_back({Rational(1), t});
  state.recompute();
  json rounds = json::array();
  std::uint64_t task = 0;
  for (int round = 0;; ++round) {
    res.index_trajectory.push_back(state.index);
    res.weight_totals.push_back(state.total_weight());
    std::vector<StructureReport> reports;
    Rational bad = 0;
    for (const auto& e : state.entries) {
      reports.push_back(check_structure(e.triple, alpha, p, Rng::derive(seed, task++)));
      if (!reports.back().good) bad += e.weight;
    }
    res.not_good_mass.push_back(bad);
    if (bad <= res.threshold) {
      res.status = UniformizeStatus::terminated;
      res.rounds = round;
      // keep the reports for selection below
      res.final_partition = state;
      res.diagnostics["good"] = json::array();
      for (const auto& r : reports) res.diagnostics["good"].push_back(r.good);
      break;
    }
    if (round == round_cap) {
      res.status = UniformizeStatus::nonterminated;
      res.rounds = round;
      res.final_partition = state;
      res.diagnostics["good"] = json::array();
      for (const auto& r : reports) res.diagnostics["good"].push_back(r.good);
      break;
    }
    PartitionState next;
    json round_info = json::array();
    for (std::size_t i = 0; i < state.entries.size(); ++i) {
      const auto& e = state.entries[i];
      if (reports[i].good) {
        next.entries.push_back(e);
        continue;
      }
      RoundReport rr = one_round_partition(e.triple, reports[i], p, Rng::derive(seed, task++));
      round_info.push_back(rr.diagnostics);
      for (auto& sub : rr.partition.entries) next.entries.push_back({e.weight * sub.weight, std::move(sub.triple)});
    }
    next.merge();
    next.recompute();
    if (next.index < state.index) res.index_monotone = false;
    if (next.index <= state.index) res.index_strict = false;
    rounds.push_back({{"round", round}, {"index", q(next.index)}, {"entries", next.entries.size()}, {"partitions", round_info}});
    state = std::move(next);
  }
  res.diagnostics["rounds"] = rounds;

  // a good entry with mu(S') >= (alpha + tau/2) mu(E1' box E2'), largest relative density
  const auto& entries = res.final_partition.entries;
  const json& good = res.diagnostics["good"];
  std::optional<std::size_t> pick;
  std::optional<std::size_t> fallback;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& tr = entries[i].triple;
    if (tr.mu_box == 0) continue;
    if (!fallback || tr.alpha > entries[*fallback].triple.alpha) fallback = i;
    if (!good[i].get<bool>()) continue;
    if (tr.mu_s < (alpha + p.tau / 2) * tr.mu_box) continue;
    if (!pick || tr.alpha > entries[*pick].triple.alpha) pick = i;
  }
  if (pick) {
    res.selected = entries[*pick].triple;
  } else {
    if (res.status == UniformizeStatus::terminated) res.status = UniformizeStatus::no_selection;
    res.selected = fallback ? entries[*fallback].triple : t;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Increment step

std::string_view to_string(IncrementOutcome::Kind k) {
  switch (k) {
    case IncrementOutcome::Kind::line_found: return "LineFound";
    case IncrementOutcome::Kind::new_triple: return "NewTriple";
    default: return "Diagnostic";
  }
}

double omega_deviation(const DensityTriple& t) {
  const int n = t.dim();
  if (n > 6) throw InvalidArgument("omega deviation is computed exactly only for n <= 6");
  const JointDist mu2 = build_mu2(build_mu1(atom_distribution()));
  const auto& rows = mu2.rows();
  const double c = to_double(t.delta1 * t.delta1 * t.delta2 * t.delta2);
  // key: indices of x, x', x'', x''' ; value: (mass, mass * E1(y)E1(y')E2(z)E2(z'))
  std::unordered_map<std::uint64_t, std::pair<double, double>> table;
  const std::uint64_t cells = pow3(n);
  std::vector<std::array<std::uint64_t, 8>> idx(n + 1);
  idx[0].fill(0);
  std::vector<double> w(n + 1, 1.0);
  std::vector<double> prob;
  for (const auto& r : rows) prob.push_back(to_double(r.p));
  auto dfs = [&](auto&& self, int c0) -> void {
    if (c0 == n) {
      const auto& x = idx[n];
      const std::uint64_t key = ((x[0] * cells + x[1]) * cells + x[2]) * cells + x[3];
      const bool inside = t.E1.has_cell(pi1_cell(x[4], n)) && t.E1.has_cell(pi1_cell(x[5], n)) &&
                          t.E2.has_cell(pi2_cell(x[6], n)) && t.E2.has_cell(pi2_cell(x[7], n));
      auto& slot = table[key];
      slot.first += w[n];
      if (inside) slot.second += w[n];
      return;
    }
    for (std::size_t j = 0; j < rows.size(); ++j) {
      for (int i = 0; i < 8; ++i) idx[c0 + 1][i] = idx[c0][i] * 3 + rows[j].t[i];
      w[c0 + 1] = w[c0] * prob[j];
      self(self, c0 + 1);
    }
  };
  dfs(dfs, 0);
  double total = 0;
  for (const auto& [key, v] : table) total += v.first * std::abs(v.second / v.first - c);
  return total;
}

namespace {

struct Candidate {
  DensityTriple triple;
  std::string label;
};

bool better(const std::optional<Candidate>& best, const DensityTriple& t) {
  return t.dim() >= 1 && t.mu_box > 0 && (!best || t.alpha > best->triple.alpha);
}

// one coordinate of a tensor draw from d
std::size_t draw_row(const std::vector<double>& prob, Rng& rng) { return rng.pick(prob); }

std::vector<double> row_probs(const JointDist& d) {
  std::vector<double> out;
  for (const auto& r : d.rows()) out.push_back(to_double(r.p));
  return out;
}

// {y in {0,1}^free (or {0,2}^free) : (y on free, z on I) lies in target}, target given over [3]^n
CubeSet slice(const CubeSet& target, const std::vector<int>& I, const Word& z, Side side) {
  const int n = target.dim();
  const auto r = make_restriction(n, I, z);
  const CubeSet restricted = restrict_set(target, r);
  const int m = restricted.dim();
  CubeSet out(m, side);
  const std::uint8_t sym = side == Side::zero_one ? 1 : 2;
  for (std::uint64_t cell = 0; cell < out.cells(); ++cell) {
    Word y(m);
    for (int i = 0; i < m; ++i) y[i] = ((cell >> (m - 1 - i)) & 1) ? sym : 0;
    if (restricted.contains_point(point_index(y))) out.set_cell(cell);
  }
  return out;
}

}  // namespace

IncrementOutcome increment_step(const DensityTriple& t, const ParamSet& p, std::uint64_t seed) {
  IncrementOutcome out;
  json& diag = out.diagnostics;
  const int n = t.dim();
  diag["n"] = n;
  diag["alpha"] = q(t.alpha);
  if (t.S.empty()) {
    diag["reason"] = "empty S";
    return out;
  }
  if (auto line = find_line(t.S)) {
    out.kind = IncrementOutcome::Kind::line_found;
    out.line = *line;
    out.lifted = t.embedding.lift_line(*line);
    diag["line"] = line->to_string();
    diag["lifted"] = out.lifted->to_string();
    return out;
  }
  if (n < 1) {
    diag["reason"] = "dimension 0";
    return out;
  }
  Rng rng(seed);

  // best chain pair (lexicographically first maximizer)
  const ChainParams chain = ChainParams::rounded(p.K, p.eta_prime, p.eta, static_cast<unsigned long>(n));
  diag["p"] = q(chain.p);
  std::optional<std::pair<unsigned, unsigned>> best_pair;
  Rational best_value = -1;
  const CubeSet pair_sets[] = {t.S, t.S};
  for (unsigned i = 0; i <= p.K; ++i) {
    for (unsigned j = i + 1; j <= p.K; ++j) {
      const Rational v = set_correlation(pair_sets, chain_pair(chain, i, j));
      if (v > best_value) {
        best_value = v;
        best_pair = std::make_pair(i, j);
      }
    }
  }
  const Rational mainterm_bound = t.mu_s * t.mu_s - 6 * p.eta - t.mu_s / Rational(p.K);
  diag["pair"] = {best_pair->first, best_pair->second};
  diag["pair_value"] = q(best_value);
  diag["mainterm_bound"] = q(mainterm_bound);
  diag["mainterm_holds"] = best_value >= mainterm_bound;

  const JointDist xi_line = lift_pair_to_line(chain_pair(chain, best_pair->first, best_pair->second));
  const JointDist nu = atom_distribution();
  const Decomposition dec = decompose(xi_line, nu);
  diag["beta"] = q(dec.beta);
  diag["line_density"] = q(line_density(t.S, xi_line));

  // Case 1: restrictions drawn from the residual, each of x, y, z restricted separately
  std::optional<Candidate> case1;
  if (dec.residual) {
    const auto probs = row_probs(*dec.residual);
    const double keep = to_double(dec.beta);
    for (int s = 0; s < p.increment_samples; ++s) {
      std::vector<int> I;
      Word zx, zy, zz;
      for (int c = 0; c < n; ++c) {
        if (rng.uniform() < keep) continue;
        const auto& atom = dec.residual->rows()[draw_row(probs, rng)].t;
        I.push_back(c);
        zx.push_back(atom[0]);
        zy.push_back(atom[1]);
        zz.push_back(atom[2]);
      }
      for (const Word* z : {&zx, &zy, &zz}) {
        DensityTriple cand = t.restricted(make_restriction(n, I, *z));
        if (better(case1, cand)) case1 = Candidate{std::move(cand), "case1"};
      }
    }
  }
  {
    // three-wise correlation of (1_S - alpha 1_box, 1_S, 1_S) under nu
    FunctionTable f = FunctionTable::indicator(t.S);
    const CubeSet box = disjoint_product(t.E1, t.E2);
    const double a = to_double(t.alpha);
    for (std::uint64_t c = 0; c < f.values.size(); ++c) f.values[c] -= box.has_cell(c) ? a : 0.0;
    const FunctionTable g = FunctionTable::indicator(t.S);
    const FunctionTable fs[] = {f, g, g};
    const auto corr = kwise_correlation(fs, nu, CorrMode::automatic, 1e7, 20000, Rng::derive(seed, 7));
    diag["three_wise"] = corr.value.real();
    diag["three_wise_method"] = corr.method;
  }

  // Case 2: four-wise average under mu2 and the F1 / F2 split
  std::optional<Candidate> case2;
  try {
    const JointDist mu2 = build_mu2(build_mu1(nu));
    const std::size_t xs[] = {0, 1, 2, 3};
    const JointDist mu2x = marginal(mu2, xs);
    FunctionTable f = FunctionTable::indicator(t.S);
    const CubeSet box = disjoint_product(t.E1, t.E2);
    const double a = to_double(t.alpha);
    for (std::uint64_t c = 0; c < f.values.size(); ++c) f.values[c] -= box.has_cell(c) ? a : 0.0;
    const FunctionTable fs[] = {f, f, f, f};
    const auto four = kwise_correlation(fs, mu2x, CorrMode::automatic, 1e7, 20000, Rng::derive(seed, 8));
    diag["four_wise"] = four.value.real();
    diag["four_wise_method"] = four.method;
    if (n <= 6) diag["omega_deviation"] = omega_deviation(t);

    const Word four_atoms[] = {{0, 0, 0, 0}, {0, 2, 0, 2}, {0, 0, 1, 1}};
    const JointDist nu4 = uniform_on(mu2x.alphabets(), four_atoms);
    const Decomposition d2 = decompose(mu2x, nu4);
    diag["beta2"] = q(d2.beta);
    if (d2.residual) {
      const auto probs = row_probs(*d2.residual);
      const double keep = to_double(d2.beta);
      int event_count = 0;
      for (int s = 0; s < p.increment_samples; ++s) {
        std::vector<int> I;
        Word z0, z1, z2, z3;
        for (int c = 0; c < n; ++c) {
          if (rng.uniform() < keep) continue;
          const auto& atom = d2.residual->rows()[draw_row(probs, rng)].t;
          I.push_back(c);
          z0.push_back(atom[0]);
          z1.push_back(atom[1]);
          z2.push_back(atom[2]);
          z3.push_back(atom[3]);
        }
        if (static_cast<int>(I.size()) == n) continue;
        // event: (z, 0) lies in E1 box E2
        Word zero(n, 0);
        for (std::size_t k = 0; k < I.size(); ++k) zero[I[k]] = z0[k];
        if (!box.contains_point(point_index(zero))) continue;
        ++event_count;
        const CubeSet minus = box.intersect(t.S.complement());
        const CubeSet f1p = slice(t.S, I, z2, Side::zero_one);
        const CubeSet f1m = slice(minus, I, z2, Side::zero_one);
        const CubeSet f2p = slice(t.S, I, z1, Side::zero_two);
        const CubeSet f2m = slice(minus, I, z1, Side::zero_two);
        const DensityTriple base = t.restricted(make_restriction(n, I, z3));
        for (const CubeSet* a1 : {&f1p, &f1m}) {
          for (const CubeSet* a2 : {&f2p, &f2m}) {
            DensityTriple cand = base.refined(*a1, *a2);
            if (better(case2, cand)) case2 = Candidate{std::move(cand), "case2"};
          }
        }
      }
      diag["event_samples"] = event_count;
    }
  } catch (const std::exception& e) {
    diag["case2_error"] = e.what();
  }

  if (case1) diag["case1_best"] = q(case1->triple.alpha);
  if (case2) diag["case2_best"] = q(case2->triple.alpha);
  const bool c1 = case1 && case1->triple.alpha > t.alpha;
  const bool c2 = case2 && case2->triple.alpha > t.alpha;
  std::optional<Candidate> chosen;
  if (c1 && (!c2 || case1->triple.alpha >= case2->triple.alpha)) chosen = case1;
  else if (c2) chosen = case2;
  if (!chosen) {
    diag["reason"] = "no sub-rectangle with larger relative density";
    return out;
  }
  // exact recount before claiming anything
  const DensityTriple& nt = chosen->triple;
  const DensityTriple recount = DensityTriple::make(nt.S, nt.E1, nt.E2);
  if (!(recount.alpha > t.alpha)) {
    diag["reason"] = "recount did not confirm the increment";
    return out;
  }
  out.kind = IncrementOutcome::Kind::new_triple;
  out.triple = nt;
  diag["case"] = chosen->label;
  diag["new_alpha"] = q(recount.alpha);
  diag["new_n"] = nt.dim();
  return out;
}

// ---------------------------------------------------------------------------
// Driver

bool verify_lifted_line(const CubeSet& S0, const LineTemplate& line) {
  if (line.dim() != S0.dim() || line.wildcard_count() < 1) return false;
  const auto pts = line.points();
  if (!is_line(pts[0], pts[1], pts[2], S0.dim())) return false;
  return S0.contains_point(pts[0]) && S0.contains_point(pts[1]) && S0.contains_point(pts[2]);
}

DriverResult main_driver(const CubeSet& S0, const ParamSet& p, int step_cap, std::uint64_t seed) {
  DriverResult res;
  DensityTriple t = DensityTriple::root(S0);
  auto record = [&](int step, const std::string& op, const DensityTriple& tr, const Rational& index,
                    const std::string& outcome, json diagnostics) {
    res.trace.push_back({{"step", step},
                         {"op", op},
                         {"n", tr.dim()},
                         {"alpha", q(tr.alpha)},
                         {"delta1", q(tr.delta1)},
                         {"delta2", q(tr.delta2)},
                         {"index", q(index)},
                         {"outcome", outcome},
                         {"diagnostics", std::move(diagnostics)}});
  };
  for (int step = 0;; ++step) {
    if (step == step_cap) {
      res.hit_cap = true;
      break;
    }
    const Rational target = t.alpha > p.tau ? Rational(t.alpha - p.tau) : Rational(0);
    UniformizeResult u = uniformize(t, target, p, 4, Rng::derive(seed, 2 * step));
    json ud = {{"status", to_string(u.status)}, {"rounds", u.rounds}};
    t = u.selected;
    record(step, "uniformize", t, t.delta1 * t.delta1 + t.delta2 * t.delta2, std::string(to_string(u.status)), ud);

    IncrementOutcome inc = increment_step(t, p, Rng::derive(seed, 2 * step + 1));
    if (inc.kind == IncrementOutcome::Kind::new_triple) t = *inc.triple;
    record(step, "increment", t, t.delta1 * t.delta1 + t.delta2 * t.delta2, std::string(to_string(inc.kind)),
           inc.diagnostics);
    // provenance must reproduce the current triple from the root
    if (!replay(S0, t.provenance).same_sets(t)) res.provenance_ok = false;
    if (inc.kind == IncrementOutcome::Kind::line_found) {
      res.outcome = inc.kind;
      res.line = inc.lifted;
      res.line_verified = verify_lifted_line(S0, *inc.lifted);
      break;
    }
    if (inc.kind == IncrementOutcome::Kind::diagnostic) {
      res.outcome = inc.kind;
      break;
    }
    res.outcome = inc.kind;
  }
  return res;
}

}  // namespace dhjlab
