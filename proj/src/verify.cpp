#include "dhjlab/verify.hpp"

#include "dhjlab/connect.hpp"
#include "dhjlab/corr.hpp"
#include "dhjlab/errors.hpp"
#include "dhjlab/parallel.hpp"
#include "dhjlab/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>

namespace dhjlab {

using nlohmann::json;

namespace {

std::vector<Word> rows_of(const json& j) {
  std::vector<Word> out;
  for (const auto& r : j) {
    Word w;
    for (int v : r) w.push_back(static_cast<std::uint8_t>(v));
    out.push_back(std::move(w));
  }
  return out;
}

json rows_json(std::span<const Word> rows) {
  json out = json::array();
  for (const auto& r : rows) {
    json row = json::array();
    for (auto v : r) row.push_back(static_cast<int>(v));
    out.push_back(row);
  }
  return out;
}

json connectivity_json(std::span<const Word> support, const Connectivity& c) {
  json j = {{"connected", c.connected}, {"support", rows_json(support)}, {"certificate_ok", check_certificate(support, c)}};
  if (c.connected) {
    json tree = json::array();
    for (auto [a, b] : c.tree) tree.push_back({a, b});
    j["spanning_tree"] = tree;
  } else {
    j["component"] = c.side;
  }
  return j;
}

// Set comparison of a computed support with transcribed rows.
struct Comparison {
  std::vector<Word> missing;  // transcribed but absent
  std::vector<Word> extra;    // present but not transcribed
};

Comparison compare(std::vector<Word> computed, std::vector<Word> listed) {
  std::sort(computed.begin(), computed.end());
  std::sort(listed.begin(), listed.end());
  Comparison c;
  std::set_difference(listed.begin(), listed.end(), computed.begin(), computed.end(), std::back_inserter(c.missing));
  std::set_difference(computed.begin(), computed.end(), listed.begin(), listed.end(), std::back_inserter(c.extra));
  return c;
}

ClaimReport support_claim(const std::string& id, const JointDist& d, const json& listed_json, bool require_equal) {
  ClaimReport r;
  r.id = id;
  const auto listed = rows_of(listed_json);
  const auto c = compare(d.support(), listed);
  const bool ok = c.missing.empty() && (!require_equal || c.extra.empty());
  r.status = ok ? ClaimStatus::pass : ClaimStatus::fail;
  json rows = json::array();
  for (const auto& row : d.rows()) {
    json t = json::array();
    for (auto v : row.t) t.push_back(static_cast<int>(v));
    rows.push_back({{"t", t}, {"p", to_string(row.p)}});
  }
  r.certificate = {{"relation", require_equal ? "equal" : "contains"},
                   {"computed", rows},
                   {"listed", listed_json},
                   {"missing", rows_json(c.missing)},
                   {"extra", rows_json(c.extra)}};
  return r;
}

template <class F>
ClaimReport timed(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  ClaimReport r = f();
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

JointDist mu1() { return build_mu1(atom_distribution()); }
JointDist mu2() { return build_mu2(mu1()); }

JointDist eyz_projection() {
  const Projection pr[] = {{1, SymbolMap::pi1}, {1, SymbolMap::pi2}, {2, SymbolMap::pi1}, {2, SymbolMap::pi2}};
  return project_symbols(atom_distribution(), pr);
}
JointDist yy_projection() {
  const Projection pr[] = {{1, SymbolMap::pi1}, {1, SymbolMap::pi2}, {3, SymbolMap::pi1}, {3, SymbolMap::pi2}};
  return project_symbols(mu1(), pr);
}
JointDist x_box_xppp() {
  const Projection pr[] = {{0, SymbolMap::pi1}, {0, SymbolMap::pi2}, {3, SymbolMap::identity}};
  return project_symbols(mu2(), pr);
}
JointDist x_box_box() {
  const Projection pr[] = {{0, SymbolMap::pi1}, {0, SymbolMap::pi2}, {3, SymbolMap::pi1}, {3, SymbolMap::pi2}};
  return project_symbols(mu2(), pr);
}
JointDist mu4() { return build_mu4(build_mu3(mu2())); }

ClaimReport projections_claim(const std::string& id, const JointDist& d,
                              const std::vector<std::vector<std::size_t>>& projections) {
  ClaimReport r;
  r.id = id;
  const auto support = d.support();
  bool ok = true;
  json list = json::array();
  for (const auto& coords : projections) {
    const auto proj = project_support(support, coords);
    const auto c = is_connected(proj);
    ok = ok && c.connected && check_certificate(proj, c);
    json entry = connectivity_json(proj, c);
    entry["coords"] = coords;
    list.push_back(entry);
  }
  r.status = ok ? ClaimStatus::pass : ClaimStatus::fail;
  r.certificate = {{"projections", list}};
  return r;
}

std::vector<std::vector<std::size_t>> all_but_one(std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t skip = 0; skip < k; ++skip) {
    std::vector<std::size_t> c;
    for (std::size_t i = 0; i < k; ++i) {
      if (i != skip) c.push_back(i);
    }
    out.push_back(c);
  }
  return out;
}

json pairwise_json(const JointDist& d, const PairwiseConnectivity& pc) {
  json j = {{"pairwise_connected", pc.connected}, {"support", rows_json(d.support())}};
  if (pc.failing) j["failing_pair"] = {pc.failing->first, pc.failing->second};
  return j;
}

}  // namespace

std::string_view to_string(ClaimStatus s) {
  switch (s) {
    case ClaimStatus::pass: return "PASS";
    case ClaimStatus::fail: return "FAIL";
    default: return "SKIPPED";
  }
}

std::string data_dir() {
  if (const char* env = std::getenv("DHJLAB_DATA"); env && *env) return env;
  return DHJLAB_DATA_DIR;
}

json load_reference_tables(const std::string& dir) {
  const std::string path = dir + "/reference_tables.json";
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  return json::parse(in);
}

std::vector<ClaimReport> verify_table_supports(const json& tables, const JointDist& line) {
  std::vector<ClaimReport> out;
  const JointDist m1 = build_mu1(line);
  const JointDist m2 = build_mu2(m1);
  const JointDist m3 = build_mu3(m2);
  out.push_back(timed([&] { return support_claim("tables.mu1", m1, tables.at("mu1").at("rows"), true); }));
  out.push_back(timed([&] { return support_claim("tables.mu2", m2, tables.at("mu2").at("rows"), true); }));
  out.push_back(timed([&] { return support_claim("tables.mu3", m3, tables.at("mu3").at("rows"), true); }));
  return out;
}

std::vector<ClaimReport> verify_connectivity_claims(const json& tables) {
  const json& s = tables.at("supports");
  std::vector<ClaimReport> out;

  out.push_back(timed([&] {
    const JointDist d = eyz_projection();
    ClaimReport sup = support_claim("connect.eyz", d, s.at("eyz").at("rows"), true);
    ClaimReport r = projections_claim("connect.eyz", d, {{1, 2, 3}, {0, 1, 2}});
    r.certificate["support"] = sup.certificate;
    if (!sup.passed()) r.status = ClaimStatus::fail;
    return r;
  }));

  out.push_back(timed([&] {
    // the transcribed list is reported against the computed support verbatim
    const JointDist d = yy_projection();
    ClaimReport sup = support_claim("connect.yy", d, s.at("yy").at("rows"), false);
    ClaimReport r = projections_claim("connect.yy", d, all_but_one(4));
    const auto pc = is_pairwise_connected(d);
    r.certificate["support"] = sup.certificate;
    r.certificate["pairwise"] = pairwise_json(d, pc);
    if (!sup.passed() || !pc.connected) r.status = ClaimStatus::fail;
    return r;
  }));

  out.push_back(timed([&] { return projections_claim("connect.mu4", mu4(), all_but_one(4)); }));

  out.push_back(timed([&] {
    const JointDist d = x_box_xppp();
    ClaimReport r = support_claim("connect.x_box_xppp", d, s.at("x_box_xppp").at("rows"), true);
    const auto pc = is_pairwise_connected(d);
    r.certificate = {{"support", r.certificate}, {"pairwise", pairwise_json(d, pc)}};
    if (!pc.connected) r.status = ClaimStatus::fail;
    return r;
  }));

  out.push_back(timed([&] {
    const JointDist d = x_box_box();
    ClaimReport sup = support_claim("connect.x_box_box", d, s.at("x_box_box").at("rows"), true);
    ClaimReport r = projections_claim("connect.x_box_box", d, all_but_one(4));
    r.certificate["support"] = sup.certificate;
    if (!sup.passed()) r.status = ClaimStatus::fail;
    return r;
  }));

  out.push_back(timed([&] {
    ClaimReport r;
    r.id = "connect.line_not_pairwise";
    const JointDist d = atom_distribution();
    const auto pc = is_pairwise_connected(d);
    r.status = pc.connected ? ClaimStatus::fail : ClaimStatus::pass;
    r.certificate = pairwise_json(d, pc);
    if (pc.failing) {
      const std::size_t coords[] = {pc.failing->first, pc.failing->second};
      r.certificate["failing_pair_support"] = rows_json(project_support(d.support(), coords));
    }
    return r;
  }));
  return out;
}

ClaimReport verify_factor_reduction(const json& tables, std::span<const Word> rows) {
  const auto start = std::chrono::steady_clock::now();
  ClaimReport r;
  r.id = "factor_reduction";
  const json& cols = tables.at("mu2").at("columns");
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (cols[i] == name) return i;
    }
    throw InvalidArgument("unknown column " + name);
  };
  std::vector<std::size_t> e1_cols;
  std::vector<std::size_t> e2_cols;
  for (const auto& c : tables.at("factor_reduction").at("e1")) e1_cols.push_back(column(c));
  for (const auto& c : tables.at("factor_reduction").at("e2")) e2_cols.push_back(column(c));
  const std::size_t k = cols.size();
  std::uint64_t checks = 0;
  std::optional<json> counterexample;
  for (std::size_t a = 0; a < rows.size() && !counterexample; ++a) {
    for (std::size_t b = 0; b < rows.size() && !counterexample; ++b) {
      // binary cells of pi1(u), pi2(u) for each variable u = (rows[a][c], rows[b][c])
      std::vector<unsigned> c1(k), c2(k);
      for (std::size_t c = 0; c < k; ++c) {
        c1[c] = (pi1(rows[a][c]) ? 2u : 0u) + (pi1(rows[b][c]) ? 1u : 0u);
        c2[c] = (pi2(rows[a][c]) ? 2u : 0u) + (pi2(rows[b][c]) ? 1u : 0u);
      }
      for (unsigned e1 = 0; e1 < 16 && !counterexample; ++e1) {
        for (unsigned e2 = 0; e2 < 16; ++e2) {
          ++checks;
          int lhs = 1;
          for (std::size_t c = 0; c < k; ++c) lhs &= ((e1 >> c1[c]) & 1) & ((e2 >> c2[c]) & 1);
          int rhs = 1;
          for (auto c : e1_cols) rhs &= (e1 >> c1[c]) & 1;
          for (auto c : e2_cols) rhs &= (e2 >> c2[c]) & 1;
          if (lhs != rhs) {
            counterexample = json{{"rows", {a + 1, b + 1}}, {"e1_table", e1}, {"e2_table", e2}, {"lhs", lhs}, {"rhs", rhs}};
            break;
          }
        }
      }
    }
  }
  r.status = counterexample ? ClaimStatus::fail : ClaimStatus::pass;
  r.certificate = {{"checks", checks}, {"rows", rows_json(rows)}, {"dimension", 2}};
  if (counterexample) r.certificate["counterexample"] = *counterexample;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

ClaimReport verify_factor_reduction(const json& tables) {
  const auto rows = rows_of(tables.at("mu2").at("rows"));
  return verify_factor_reduction(tables, rows);
}

ClaimReport verify_factor_reduction_control(const json& tables) {
  auto rows = rows_of(tables.at("mu2").at("rows"));
  rows.at(3).at(1) = 1;
  ClaimReport inner = verify_factor_reduction(tables, rows);
  ClaimReport r = inner;
  r.id = "factor_reduction.control";
  // the perturbed support must be caught
  r.status = inner.status == ClaimStatus::fail ? ClaimStatus::pass : ClaimStatus::fail;
  r.certificate["perturbation"] = "row 4, column x': 0 -> 1";
  return r;
}

ClaimReport verify_mu2_marginals() {
  return timed([] {
    ClaimReport r;
    r.id = "mu2_marginals";
    const JointDist m2 = mu2();
    const std::size_t x[] = {0};
    const JointDist mx = marginal(atom_distribution(), x);
    bool ok = true;
    json list = json::array();
    for (std::size_t c = 0; c < 4; ++c) {
      const std::size_t coord[] = {c};
      const JointDist m = marginal(m2, coord);
      const bool eq = m == mx;
      ok = ok && eq;
      json probs = json::array();
      for (const auto& row : m.rows()) probs.push_back({{"symbol", static_cast<int>(row.t[0])}, {"p", to_string(row.p)}});
      list.push_back({{"coord", m2.names()[c]}, {"law", probs}, {"equal", eq}});
    }
    json ref = json::array();
    for (const auto& row : mx.rows()) ref.push_back({{"symbol", static_cast<int>(row.t[0])}, {"p", to_string(row.p)}});
    r.status = ok ? ClaimStatus::pass : ClaimStatus::fail;
    r.certificate = {{"reference", ref}, {"marginals", list}};
    return r;
  });
}

ClaimReport verify_mu4_support(const json& tables) {
  return timed([&] {
    const json& claim = tables.at("supports").at("mu4");
    const JointDist d = mu4();
    ClaimReport r = support_claim("mu4_support", d, claim.at("rows"), false);
    // each listed tuple arises from a pair of mu3 rows agreeing off the duplicated y, y'' slots
    const auto t3 = rows_of(tables.at("mu3").at("rows"));
    const auto tuples = rows_of(claim.at("rows"));
    const auto& sources = claim.at("sources");
    bool ok = r.passed() && sources.size() == tuples.size();
    json checks = json::array();
    Rational total = 0;
    for (std::size_t i = 0; i < tuples.size() && i < sources.size(); ++i) {
      const std::size_t a = sources[i][0].get<std::size_t>() - 1;
      const std::size_t b = sources[i][1].get<std::size_t>() - 1;
      bool agree = a < t3.size() && b < t3.size();
      if (agree) {
        for (std::size_t c : {1, 3, 4, 5, 6, 7}) agree = agree && t3[a][c] == t3[b][c];
        const Word produced = {t3[a][0], t3[a][2], t3[b][0], t3[b][2]};
        agree = agree && produced == tuples[i];
      }
      const Rational mass = d.prob(tuples[i]);
      total += mass;
      ok = ok && agree && mass > 0;
      checks.push_back({{"tuple", rows_json(std::span(&tuples[i], 1))[0]}, {"rows", sources[i]}, {"rows_agree", agree},
                        {"mass", to_string(mass)}});
    }
    Rational sum = 0;
    for (const auto& row : d.rows()) sum += row.p;
    ok = ok && sum == 1;
    r.status = ok ? ClaimStatus::pass : ClaimStatus::fail;
    r.certificate["sources"] = checks;
    r.certificate["listed_mass"] = to_string(total);
    r.certificate["total_mass"] = to_string(sum);
    return r;
  });
}

std::vector<ChainParams> default_chain_grid() {
  std::vector<ChainParams> grid;
  const unsigned long ns[] = {1, 10, 100, 10000, 1000000};
  const unsigned Ks[] = {1, 4, 10, 100};
  for (unsigned long n : ns) {
    for (unsigned K : Ks) {
      const Rational eta(1, 10);
      const Rational eta_prime = eta / Rational(100 * K);
      grid.push_back(ChainParams::rounded(K, eta_prime, eta, n));
    }
  }
  return grid;
}

ClaimReport verify_obs_joint(std::span<const ChainParams> grid) {
  return timed([&] {
    ClaimReport r;
    r.id = "chain_bounds";
    bool ok = true;
    std::uint64_t checks = 0;
    json points = json::array();
    for (const auto& prm : grid) {
      if (Rational(prm.K) * prm.eta_prime * 100 > prm.eta) throw InvalidArgument("grid point violates K eta' <= eta/100");
      const Rational n(static_cast<unsigned long>(prm.n));
      const Rational third(1, 3);
      // |a - 1/3| <= eta / sqrt(n)  <=>  (a - 1/3)^2 n <= eta^2
      auto close = [&](const Rational& a) {
        const Rational d = a - third;
        return d * d * n <= prm.eta * prm.eta;
      };
      bool point_ok = true;
      Rational min12 = 1;
      for (unsigned i = 0; i <= prm.K; ++i) {
        const JointDist nu = chain_marginal(prm, i);
        const Word s0 = {0}, s1 = {1}, s2 = {2};
        point_ok = point_ok && nu.prob(s0) == third && close(nu.prob(s1)) && close(nu.prob(s2));
        if (i == 0) point_ok = point_ok && nu.prob(s1) == third && nu.prob(s2) == third;
        checks += 3;
        for (unsigned j = i + 1; j <= prm.K; ++j) {
          const JointDist xi = chain_pair(prm, i, j);
          const Word p00 = {0, 0}, p11 = {1, 1}, p22 = {2, 2}, p12 = {1, 2};
          const Rational m12 = xi.prob(p12);
          // m12 >= eta' / (10 sqrt(n))  <=>  (10 m12)^2 n >= eta'^2
          const bool lower = m12 > 0 && (10 * m12) * (10 * m12) * n >= prm.eta_prime * prm.eta_prime;
          point_ok = point_ok && xi.prob(p00) == third && close(xi.prob(p11)) && close(xi.prob(p22)) && lower;
          point_ok = point_ok && xi.rows().size() == 4;
          min12 = std::min(min12, m12);
          checks += 4;
        }
      }
      ok = ok && point_ok;
      points.push_back({{"n", prm.n},
                        {"K", prm.K},
                        {"eta", to_string(prm.eta)},
                        {"eta_prime", to_string(prm.eta_prime)},
                        {"p", to_string(prm.p)},
                        {"min_mass_12", to_string(min12)},
                        {"ok", point_ok}});
    }
    r.status = ok ? ClaimStatus::pass : ClaimStatus::fail;
    r.certificate = {{"checks", checks}, {"points", points}};
    return r;
  });
}

ClaimReport verify_mainterm(const CubeSet& S, const ChainParams& prm) {
  return timed([&] {
    ClaimReport r;
    r.id = "mainterm";
    if (S.side() != Side::full || static_cast<unsigned long>(S.dim()) != prm.n) {
      throw InvalidArgument("set dimension must match the chain parameters");
    }
    const Rational mu = uniform_measure(S);
    const Rational bound = mu * mu - 6 * prm.eta - mu / Rational(prm.K);
    const CubeSet sets[] = {S, S};
    Rational best = -1;
    json pairs = json::array();
    std::pair<unsigned, unsigned> arg{0, 1};
    for (unsigned i = 0; i <= prm.K; ++i) {
      for (unsigned j = i + 1; j <= prm.K; ++j) {
        const Rational v = set_correlation(sets, chain_pair(prm, i, j));
        pairs.push_back({{"i", i}, {"j", j}, {"value", to_string(v)}});
        if (v > best) {
          best = v;
          arg = {i, j};
        }
      }
    }
    r.status = best >= bound ? ClaimStatus::pass : ClaimStatus::fail;
    r.certificate = {{"measure", to_string(mu)},
                     {"bound", to_string(bound)},
                     {"best", to_string(best)},
                     {"best_pair", {arg.first, arg.second}},
                     {"pairs", pairs}};
    return r;
  });
}

ClaimReport verify_me1e2(const CubeSet& E1, const CubeSet& E2, double gamma, std::uint64_t trials, std::uint64_t seed) {
  return timed([&] {
    ClaimReport r;
    r.id = "box_discrepancy";
    const Rational d1 = uniform_measure(E1);
    const Rational d2 = uniform_measure(E2);
    const Rational box = uniform_measure(disjoint_product(E1, E2));
    const Rational disc = abs(box - d1 * d2);
    const std::vector<double> law = {2.0 / 3.0, 1.0 / 3.0};
    const int n = E1.dim();
    const int n_prime = std::max(1, static_cast<int>(std::ceil(std::pow(std::max(1, n), 0.25) - 1e-12)));
    PseudoOptions opt;
    opt.trials = trials;
    opt.seed = Rng::derive(seed, 1);
    const auto v1 = product_pseudorandom_test(FunctionTable::indicator(E1, to_double(d1)), n_prime, gamma, law, opt);
    opt.seed = Rng::derive(seed, 2);
    const auto v2 = product_pseudorandom_test(FunctionTable::indicator(E2, to_double(d2)), n_prime, gamma, law, opt);
    const double limit = 2 * std::sqrt(gamma);
    const bool both_pseudo = v1.verdict == Verdict::pseudorandom && v2.verdict == Verdict::pseudorandom;
    r.status = both_pseudo && to_double(disc) > limit ? ClaimStatus::fail : ClaimStatus::pass;
    r.certificate = {{"mu_E1", to_string(d1)},
                     {"mu_E2", to_string(d2)},
                     {"mu_box", to_string(box)},
                     {"discrepancy", to_string(disc)},
                     {"limit", limit},
                     {"verdict_E1", to_string(v1.verdict)},
                     {"verdict_E2", to_string(v2.verdict)}};
    return r;
  });
}

std::vector<ClaimReport> verify_all(int threads, std::uint64_t seed) {
  const json tables = load_reference_tables();
  std::vector<std::function<std::vector<ClaimReport>()>> jobs;
  jobs.push_back([&] { return verify_table_supports(tables); });
  jobs.push_back([&] { return verify_connectivity_claims(tables); });
  jobs.push_back([&] { return std::vector<ClaimReport>{verify_factor_reduction(tables)}; });
  jobs.push_back([&] { return std::vector<ClaimReport>{verify_factor_reduction_control(tables)}; });
  jobs.push_back([] { return std::vector<ClaimReport>{verify_mu2_marginals()}; });
  jobs.push_back([&] { return std::vector<ClaimReport>{verify_mu4_support(tables)}; });
  jobs.push_back([] {
    const auto grid = default_chain_grid();
    return std::vector<ClaimReport>{verify_obs_joint(grid)};
  });
  jobs.push_back([seed] {
    const int n = 6;
    CubeSet S(n, Side::full);
    Rng rng(Rng::derive(seed, 11));
    for (std::uint64_t c = 0; c < S.cells(); ++c) {
      if (rng.bernoulli(0.5)) S.set_cell(c);
    }
    return std::vector<ClaimReport>{
        verify_mainterm(S, ChainParams::rounded(4, Rational(1, 4000), Rational(1, 10), static_cast<unsigned long>(n)))};
  });
  jobs.push_back([seed] {
    const int n = 6;
    CubeSet E1(n, Side::zero_one), E2(n, Side::zero_two);
    for (std::uint64_t c = 0; c < E1.cells(); ++c) {
      if ((c >> (n - 1)) & 1) {
        E1.set_cell(c);
        E2.set_cell(c);
      }
    }
    return std::vector<ClaimReport>{verify_me1e2(E1, E2, 0.3, 20, seed)};
  });
  std::vector<std::vector<ClaimReport>> results(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    try {
      results[i] = jobs[i]();
    } catch (const std::exception& e) {
      ClaimReport r;
      r.id = "job." + std::to_string(i);
      r.status = ClaimStatus::fail;
      r.certificate = {{"error", e.what()}};
      results[i] = {r};
    }
  });
  std::vector<ClaimReport> out;
  for (auto& v : results) {
    for (auto& r : v) out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(), [](const ClaimReport& a, const ClaimReport& b) { return a.id < b.id; });
  return out;
}

json to_json(const std::vector<ClaimReport>& reports) {
  json out = json::object();
  for (const auto& r : reports) {
    out[r.id] = {{"claim_id", r.id}, {"status", to_string(r.status)}, {"certificate", r.certificate}};
  }
  return out;
}

}  // namespace dhjlab
