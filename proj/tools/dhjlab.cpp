#include "dhjlab/connect.hpp"
#include "dhjlab/corr.hpp"
#include "dhjlab/cube.hpp"
#include "dhjlab/dist.hpp"
#include "dhjlab/errors.hpp"
#include "dhjlab/extremal.hpp"
#include "dhjlab/increment.hpp"
#include "dhjlab/io.hpp"
#include "dhjlab/restrict.hpp"
#include "dhjlab/rng.hpp"
#include "dhjlab/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace dhjlab;
using nlohmann::json;

namespace {

constexpr const char* kTool = "dhjlab";
constexpr const char* kVersion = "0.1.0";

struct Globals {
  std::uint64_t seed = 0;
  std::string out = "-";
  std::string config;
  int threads = 1;
  double budget = 600;
  CLI::Option* seed_opt = nullptr;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A bare set file or a certificate wrapping one under "set".
CubeSet load_set(const std::string& path) {
  const json j = read_json_file(path);
  return set_from_json(j.contains("set") ? j.at("set") : j);
}

ParamSet load_params(const Globals& g) {
  ParamSet p;
  if (!g.config.empty()) p = param_set_from_json(read_json_file(g.config));
  p.threads = g.threads;
  p.validate();
  return p;
}

void require_seed(const Globals& g, const std::string& cmd) {
  if (g.seed_opt->count() == 0) throw UsageError(cmd + " draws random choices and needs --seed");
}

json report(const std::string& command, const Globals& g, const ParamSet& p, json result) {
  return {{"meta", {{"tool", kTool}, {"version", kVersion}, {"command", command}, {"seed", g.seed}, {"rng", std::string(Rng::kName)}}},
          {"params", to_json(p)},
          {"result", std::move(result)}};
}

std::vector<double> parse_law(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(parse_rational(item)));
  return out;
}

std::vector<int> parse_ints(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

DensityTriple load_triple(const std::string& triple_path, const std::string& set_path) {
  if (!triple_path.empty()) {
    const json j = read_json_file(triple_path);
    return DensityTriple::make(set_from_json(j.at("S")), set_from_json(j.at("E1")), set_from_json(j.at("E2")));
  }
  if (set_path.empty()) throw UsageError("give --triple or --set");
  return DensityTriple::root(load_set(set_path));
}

json triple_json(const DensityTriple& t) {
  return {{"n", t.dim()},
          {"alpha", to_string(t.alpha)},
          {"delta1", to_string(t.delta1)},
          {"delta2", to_string(t.delta2)},
          {"mu_S", to_string(t.mu_s)},
          {"mu_box", to_string(t.mu_box)},
          {"S", set_to_json(t.S)},
          {"E1", set_to_json(t.E1)},
          {"E2", set_to_json(t.E2)},
          {"provenance_steps", t.provenance.size()}};
}

json pseudo_json(const PseudoReport& r) {
  json per = json::array();
  for (const auto& d : r.per_delta) {
    json e = {{"delta", to_string(d.delta)}, {"trials", d.trials},   {"exceed", d.exceed},
              {"fraction", d.fraction},      {"wilson_lo", d.wilson_lo}, {"wilson_hi", d.wilson_hi},
              {"verdict", to_string(d.verdict)}, {"best", d.best}};
    if (d.witness_restriction) e["witness_restriction"] = restriction_to_json(*d.witness_restriction);
    if (d.witness) e["witness"] = product_to_json(*d.witness);
    per.push_back(e);
  }
  return {{"verdict", to_string(r.verdict)}, {"zero_function", r.zero_function}, {"n", r.n},
          {"n_prime", r.n_prime},           {"gamma", r.gamma},                  {"per_delta", per}};
}

json corr_json(const CorrelationReport& r) {
  json j = {{"value", {r.value.real(), r.value.imag()}},
            {"magnitude", r.magnitude},
            {"method", r.method},
            {"converged", r.converged},
            {"sweeps", r.sweeps},
            {"updates", r.updates},
            {"monotone_violations", r.monotone_violations},
            {"max_decrease", r.max_decrease}};
  if (r.method == "grid") j["gap_bound"] = r.gap_bound;
  if (r.samples) {
    j["samples"] = r.samples;
    j["stderr"] = r.stderr_;
  }
  if (r.witness) j["witness"] = product_to_json(*r.witness);
  if (r.real_value) j["real_value"] = *r.real_value;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Combinatorial line laboratory: exact sets, distributions, correlations and the increment loop"};
  app.require_subcommand(1);
  Globals g;
  g.seed_opt = app.add_option("--seed", g.seed, "Seed for every random choice")->expected(1);
  app.add_option("--out", g.out, "Report path ('-' for standard output)");
  app.add_option("--config", g.config, "ParamSet JSON file");
  app.add_option("--threads", g.threads, "Worker cap")->check(CLI::PositiveNumber);
  app.add_option("--budget", g.budget, "Time budget in seconds (extremal search)");
  app.fallthrough();

  int exit_code = 0;
  std::function<json(const ParamSet&)> run;

  // lines
  auto* lines = app.add_subcommand("lines", "Enumerate or count combinatorial lines");
  int lines_n = -1;
  bool lines_count = false;
  std::string lines_set;
  std::size_t lines_max = 20;
  lines->add_option("--n", lines_n, "Dimension");
  lines->add_flag("--count", lines_count, "Print only the count");
  lines->add_option("--set", lines_set, "Count the lines inside this set");
  lines->add_option("--max-witnesses", lines_max, "Witness lines listed for --set");
  lines->callback([&] {
    if (!lines_set.empty()) {
      const CubeSet s = load_set(lines_set);
      const auto found = lines_in_set(s, lines_max);
      if (lines_count) {
        std::cout << found.count << '\n';
        return;
      }
      run = [&, s, found](const ParamSet&) {
        json w = json::array();
        for (const auto& l : found.witnesses) w.push_back(l.to_string());
        return json{{"n", s.dim()}, {"count", found.count}, {"witnesses", w}};
      };
      return;
    }
    if (lines_n < 0) throw UsageError("give --n or --set");
    if (lines_count) {
      std::cout << line_count(lines_n) << '\n';
      return;
    }
    run = [&](const ParamSet&) {
      json all = json::array();
      for (const auto& l : enumerate_lines(lines_n)) all.push_back(l.to_string());
      return json{{"n", lines_n}, {"count", line_count(lines_n)}, {"lines", all}};
    };
  });

  // measure
  auto* measure_cmd = app.add_subcommand("measure", "Exact product measure of a set");
  std::string measure_set, measure_law;
  measure_cmd->add_option("--set", measure_set, "Set file")->required();
  measure_cmd->add_option("--law", measure_law, "Law on {0,1,2}, e.g. 1/3,1/3,1/3");
  measure_cmd->callback([&] {
    run = [&](const ParamSet&) {
      const CubeSet s = load_set(measure_set);
      Rational m;
      if (measure_law.empty()) {
        m = uniform_measure(s);
      } else {
        CoordLaw law{};
        std::stringstream ss(measure_law);
        std::string item;
        for (int i = 0; i < 3 && std::getline(ss, item, ','); ++i) law[i] = parse_rational(item);
        const CoordLaw laws[] = {law};
        m = measure(s, laws);
      }
      return json{{"n", s.dim()}, {"size", s.size()}, {"measure", to_string(m)}, {"measure_decimal", to_double(m)}};
    };
  });

  // boxprod
  auto* box = app.add_subcommand("boxprod", "Disjoint product of a {0,1} set and a {0,2} set");
  std::string box_e1, box_e2;
  box->add_option("--e1", box_e1, "Zero-one set file")->required();
  box->add_option("--e2", box_e2, "Zero-two set file")->required();
  box->callback([&] {
    run = [&](const ParamSet&) {
      const CubeSet e1 = load_set(box_e1);
      const CubeSet e2 = load_set(box_e2);
      const CubeSet b = disjoint_product(e1, e2);
      return json{{"set", set_to_json(b)},
                  {"measure", to_string(uniform_measure(b))},
                  {"mu_E1", to_string(uniform_measure(e1))},
                  {"mu_E2", to_string(uniform_measure(e2))}};
    };
  });

  // verify
  auto* verify = app.add_subcommand("verify", "Check the finite claims with certificates");
  bool verify_all_flag = false;
  std::string verify_claim;
  verify->add_flag("--all", verify_all_flag, "Run every claim");
  verify->add_option("--claim", verify_claim, "Run every claim and report only this id");
  verify->callback([&] {
    if (!verify_all_flag && verify_claim.empty()) throw UsageError("give --all or --claim");
    run = [&](const ParamSet& p) {
      auto reports = verify_all(p.threads, g.seed);
      if (!verify_claim.empty()) {
        std::erase_if(reports, [&](const ClaimReport& r) { return r.id != verify_claim; });
        if (reports.empty()) throw UsageError("unknown claim " + verify_claim);
      }
      for (const auto& r : reports) {
        if (r.status == ClaimStatus::fail) exit_code = 1;
      }
      return to_json(reports);
    };
  });

  // corr
  auto* corr = app.add_subcommand("corr", "Maximum correlation with a product function");
  std::string corr_table, corr_set, corr_law, corr_method = "alternating";
  int corr_restarts = 8, corr_grid = 16;
  corr->add_option("--table", corr_table, "Function table file");
  corr->add_option("--set", corr_set, "Use 1_E minus its density for this set");
  corr->add_option("--law", corr_law, "Law over the table's alphabet");
  corr->add_option("--method", corr_method, "alternating or grid")->check(CLI::IsMember({"alternating", "grid"}));
  corr->add_option("--restarts", corr_restarts, "Random restarts");
  corr->add_option("--grid", corr_grid, "Phase grid resolution");
  auto function_input = [](const std::string& table, const std::string& set, std::string& law) {
    FunctionTable f;
    if (!table.empty()) {
      f = table_from_json(read_json_file(table));
    } else if (!set.empty()) {
      const CubeSet s = load_set(set);
      f = FunctionTable::indicator(s, to_double(uniform_measure(s)));
    } else {
      throw UsageError("give --table or --set");
    }
    if (law.empty()) {
      if (f.q() == 2) law = "2/3,1/3";
      else law = "1/3,1/3,1/3";
    }
    return f;
  };
  corr->callback([&] {
    require_seed(g, "corr");
    run = [&](const ParamSet&) {
      const FunctionTable f = function_input(corr_table, corr_set, corr_law);
      const auto law = parse_law(corr_law);
      MaxOptions mo;
      mo.method = corr_method == "grid" ? MaxMethod::grid : MaxMethod::alternating;
      mo.restarts = corr_restarts;
      mo.grid_resolution = corr_grid;
      mo.seed = g.seed;
      return corr_json(max_product_correlation(f, law, mo));
    };
  });

  // pseudo
  auto* pseudo = app.add_subcommand("pseudo", "Product pseudorandomness test");
  std::string pseudo_table, pseudo_set, pseudo_law;
  int pseudo_nprime = 0;
  double pseudo_gamma = 0;
  std::uint64_t pseudo_trials = 0;
  pseudo->add_option("--table", pseudo_table, "Function table file");
  pseudo->add_option("--set", pseudo_set, "Use 1_E minus its density for this set");
  pseudo->add_option("--law", pseudo_law, "Law over the table's alphabet");
  pseudo->add_option("--n-prime", pseudo_nprime, "Smallest number of live coordinates (default ceil(n^(1/4)))");
  pseudo->add_option("--gamma", pseudo_gamma, "Correlation level (default from params)");
  pseudo->add_option("--trials", pseudo_trials, "Restrictions per delta (default from params)");
  pseudo->callback([&] {
    require_seed(g, "pseudo");
    run = [&](const ParamSet& p) {
      const FunctionTable f = function_input(pseudo_table, pseudo_set, pseudo_law);
      const auto law = parse_law(pseudo_law);
      PseudoOptions opt;
      opt.trials = pseudo_trials ? pseudo_trials : p.tester_trials;
      opt.restarts = p.tester_restarts;
      opt.threads = p.threads;
      opt.seed = g.seed;
      const int np = pseudo_nprime > 0 ? pseudo_nprime : p.n_prime(std::max(1, f.n));
      const auto r = product_pseudorandom_test(f, np, pseudo_gamma > 0 ? pseudo_gamma : p.gamma, law, opt);
      if (r.verdict == Verdict::not_pseudorandom) exit_code = 1;
      return pseudo_json(r);
    };
  });

  // restrict
  auto* restrict_cmd = app.add_subcommand("restrict", "Restrict a set, optionally collapsing blocks");
  std::string r_set, r_I, r_z, r_delta = "1/2", r_collapse, r_file;
  bool r_sample = false;
  restrict_cmd->add_option("--set", r_set, "Set file")->required();
  restrict_cmd->add_option("--I", r_I, "Fixed coordinates, 0-based, comma separated");
  restrict_cmd->add_option("--z", r_z, "Symbols for I as a digit string");
  restrict_cmd->add_option("--restriction", r_file, "Restriction file");
  restrict_cmd->add_flag("--sample", r_sample, "Draw I and z at random (uniform symbols)");
  restrict_cmd->add_option("--delta", r_delta, "Survival probability for --sample");
  restrict_cmd->add_option("--collapse", r_collapse, "Blocks after restriction, e.g. 0-2;1-3");
  restrict_cmd->callback([&] {
    if (r_sample) require_seed(g, "restrict --sample");
    run = [&](const ParamSet&) {
      const CubeSet s = load_set(r_set);
      Restriction r;
      if (r_sample) r = sample_restriction(s.dim(), parse_rational(r_delta), uniform_law(), g.seed);
      else if (!r_file.empty()) r = restriction_from_json(read_json_file(r_file));
      else r = make_restriction(s.dim(), parse_ints(r_I), parse_word(r_z));
      if (s.side() != Side::full) r = restriction_for_side(r, s.side());
      CubeSet out = restrict_set(s, r);
      json j = {{"restriction", restriction_to_json(r)}};
      if (!r_collapse.empty()) {
        CollapseSpec spec;
        std::stringstream ss(r_collapse);
        std::string block;
        while (std::getline(ss, block, ';')) {
          std::replace(block.begin(), block.end(), '-', ',');
          spec.blocks.push_back(parse_ints(block));
        }
        out = collapse_eq(out, spec);
        j["collapse"] = spec.blocks;
      }
      j["set"] = set_to_json(out);
      j["measure"] = to_string(uniform_measure(out));
      return j;
    };
  });

  // uniformize
  auto* uni = app.add_subcommand("uniformize", "Partition until E1 and E2 pass the tester");
  std::string u_triple, u_set, u_alpha;
  int u_rounds = 8;
  uni->add_option("--triple", u_triple, "File with S, E1, E2");
  uni->add_option("--set", u_set, "Root set (E1, E2 full)");
  uni->add_option("--alpha", u_alpha, "Density level (default: params alpha)");
  uni->add_option("--rounds", u_rounds, "Round cap");
  uni->callback([&] {
    require_seed(g, "uniformize");
    run = [&](const ParamSet& p) {
      const DensityTriple t = load_triple(u_triple, u_set);
      const Rational alpha = u_alpha.empty() ? p.alpha : parse_rational(u_alpha);
      const auto r = uniformize(t, alpha, p, u_rounds, g.seed);
      json traj = json::array();
      for (const auto& x : r.index_trajectory) traj.push_back(to_string(x));
      json weights = json::array();
      for (const auto& x : r.weight_totals) weights.push_back(to_string(x));
      json bad = json::array();
      for (const auto& x : r.not_good_mass) bad.push_back(to_string(x));
      return json{{"status", to_string(r.status)},      {"rounds", r.rounds},
                  {"index_trajectory", traj},           {"weight_totals", weights},
                  {"not_good_mass", bad},               {"threshold", to_string(r.threshold)},
                  {"index_monotone", r.index_monotone}, {"index_strict", r.index_strict},
                  {"entries", r.final_partition.entries.size()}, {"selected", triple_json(r.selected)},
                  {"diagnostics", r.diagnostics}};
    };
  });

  // increment
  auto* inc = app.add_subcommand("increment", "One density increment step");
  std::string i_triple, i_set;
  inc->add_option("--triple", i_triple, "File with S, E1, E2");
  inc->add_option("--set", i_set, "Root set (E1, E2 full)");
  inc->callback([&] {
    require_seed(g, "increment");
    run = [&](const ParamSet& p) {
      const DensityTriple t = load_triple(i_triple, i_set);
      const auto r = increment_step(t, p, g.seed);
      json j = {{"outcome", to_string(r.kind)}, {"diagnostics", r.diagnostics}};
      if (r.line) j["line"] = r.line->to_string();
      if (r.lifted) j["lifted"] = r.lifted->to_string();
      if (r.triple) j["triple"] = triple_json(*r.triple);
      return j;
    };
  });

  // drive
  auto* drive = app.add_subcommand("drive", "Alternate uniformization and increments from the root");
  std::string d_set, d_trace;
  int d_steps = 10;
  drive->add_option("--set", d_set, "Root set file")->required();
  drive->add_option("--steps", d_steps, "Step cap");
  drive->add_option("--trace", d_trace, "JSON-lines trace path");
  drive->callback([&] {
    require_seed(g, "drive");
    run = [&](const ParamSet& p) {
      const CubeSet s0 = load_set(d_set);
      const auto r = main_driver(s0, p, d_steps, g.seed);
      if (!d_trace.empty()) {
        std::ofstream out(d_trace);
        if (!out) throw InvalidArgument("cannot write " + d_trace);
        for (const auto& rec : r.trace) out << rec.dump() << '\n';
      }
      const bool line = r.outcome == IncrementOutcome::Kind::line_found;
      if ((line && !r.line_verified) || !r.provenance_ok) exit_code = 1;
      json j = {{"outcome", to_string(r.outcome)},
                {"hit_cap", r.hit_cap},
                {"provenance_ok", r.provenance_ok},
                {"steps", r.trace.size()}};
      if (r.line) {
        j["line"] = r.line->to_string();
        j["line_verified"] = r.line_verified;
      }
      if (d_trace.empty()) j["trace"] = r.trace;
      return j;
    };
  });

  // extremal
  auto* ext = app.add_subcommand("extremal", "Largest line-free subset of [3]^n");
  int e_n = -1;
  std::string e_cert;
  ext->add_option("--n", e_n, "Dimension (at most 5)")->required();
  ext->add_option("--certificate", e_cert, "Write the witness set here");
  ext->callback([&] {
    run = [&](const ParamSet&) {
      const auto r = max_line_free(e_n, g.budget, g.seed);
      const bool ok = verify_certificate(r.witness, r.size);
      if (!ok) exit_code = 1;
      json cert = {{"claimed_size", r.size}, {"set", set_to_json(r.witness)}};
      if (!e_cert.empty()) write_json(cert, e_cert);
      return json{{"n", e_n}, {"size", r.size}, {"optimal", r.optimal}, {"nodes", r.nodes},
                  {"certificate_ok", ok}, {"certificate", cert}};
    };
  });

  // dist
  auto* dist = app.add_subcommand("dist", "Build or inspect a distribution");
  std::string dist_build, dist_file;
  unsigned chain_i = 0, chain_j = 1, chain_K = 4;
  unsigned long chain_n = 16;
  dist->add_option("--build", dist_build, "line, mu1, mu2, mu3, mu4 or chain")
      ->check(CLI::IsMember({"line", "mu1", "mu2", "mu3", "mu4", "chain"}));
  dist->add_option("--file", dist_file, "Distribution file to inspect");
  dist->add_option("--i", chain_i, "Chain index i");
  dist->add_option("--j", chain_j, "Chain index j");
  dist->add_option("--K", chain_K, "Chain length");
  dist->add_option("--n", chain_n, "Dimension used for the flip probability");
  dist->callback([&] {
    if (dist_build.empty() == dist_file.empty()) throw UsageError("give exactly one of --build and --file");
    run = [&](const ParamSet& p) {
      JointDist d;
      if (!dist_file.empty()) {
        d = dist_from_json(read_json_file(dist_file));
      } else if (dist_build == "chain") {
        const auto prm = ChainParams::rounded(chain_K, p.eta_prime, p.eta, chain_n);
        d = chain_pair(prm, chain_i, chain_j);
      } else {
        d = atom_distribution();
        if (dist_build != "line") d = build_mu1(d);
        if (dist_build == "mu2" || dist_build == "mu3" || dist_build == "mu4") d = build_mu2(d);
        if (dist_build == "mu3" || dist_build == "mu4") d = build_mu3(d);
        if (dist_build == "mu4") d = build_mu4(d);
      }
      const auto support = d.support();
      const auto conn = is_connected(support);
      const auto pw = is_pairwise_connected(d);
      return json{{"distribution", dist_to_json(d)},
                  {"support_size", support.size()},
                  {"connected", conn.connected},
                  {"pairwise_connected", pw.connected}};
    };
  });

  try {
    app.parse(argc, argv);
    if (run) {
      const ParamSet p = load_params(g);
      write_json(report(app.get_subcommands().front()->get_name(), g, p, run(p)), g.out);
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n' << app.help();
    return 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return exit_code;
}
