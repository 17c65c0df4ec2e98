#include "dhjlab/io.hpp"

#include "dhjlab/errors.hpp"

#include <fstream>
#include <iostream>

namespace dhjlab {

using nlohmann::json;

json set_to_json(const CubeSet& set) {
  json points = json::array();
  for (const auto& w : set.words()) points.push_back(format_word(w));
  return {{"n", set.dim()}, {"side", std::string(to_string(set.side()))}, {"points", points}};
}

CubeSet set_from_json(const json& j) {
  const int n = j.at("n").get<int>();
  const Side side = parse_side(j.value("side", std::string("full")));
  std::vector<Word> words;
  for (const auto& p : j.at("points")) {
    Word w = parse_word(p.get<std::string>());
    if (static_cast<int>(w.size()) != n) throw InvalidArgument("point length differs from n");
    words.push_back(std::move(w));
  }
  return CubeSet::from_words(n, side, words);
}

json dist_to_json(const JointDist& d) {
  json alphabets = json::array();
  for (const auto& a : d.alphabets()) {
    json sym = json::array();
    for (auto s : a) sym.push_back(static_cast<int>(s));
    alphabets.push_back(sym);
  }
  json rows = json::array();
  for (const auto& r : d.rows()) {
    json t = json::array();
    for (auto s : r.t) t.push_back(static_cast<int>(s));
    rows.push_back({{"t", t}, {"p", {{"num", r.p.get_num().get_str()}, {"den", r.p.get_den().get_str()}}}});
  }
  json out = {{"alphabets", alphabets}, {"rows", rows}};
  if (!d.names().empty()) out["names"] = d.names();
  return out;
}

JointDist dist_from_json(const json& j) {
  std::vector<Alphabet> alphabets;
  for (const auto& a : j.at("alphabets")) {
    Alphabet al;
    for (int s : a) al.push_back(static_cast<std::uint8_t>(s));
    alphabets.push_back(std::move(al));
  }
  std::vector<DistRow> rows;
  for (const auto& r : j.at("rows")) {
    DistRow row;
    for (int s : r.at("t")) row.t.push_back(static_cast<std::uint8_t>(s));
    const auto& p = r.at("p");
    if (p.is_object()) {
      row.p = Rational(BigInt(p.at("num").get<std::string>()), BigInt(p.at("den").get<std::string>()));
      row.p.canonicalize();
    } else {
      row.p = parse_rational(p.get<std::string>());
    }
    rows.push_back(std::move(row));
  }
  std::vector<std::string> names;
  if (j.contains("names")) names = j.at("names").get<std::vector<std::string>>();
  return JointDist::merged(std::move(alphabets), std::move(rows), std::move(names));
}

json restriction_to_json(const Restriction& r) {
  json out = {{"n", r.n}, {"I", r.I}, {"z", format_word(r.z)}, {"delta", to_string(r.delta)}, {"seed", r.seed}};
  if (!r.source.empty()) out["source"] = r.source;
  return out;
}

Restriction restriction_from_json(const json& j) {
  Restriction r = make_restriction(j.at("n").get<int>(), j.at("I").get<std::vector<int>>(),
                                   parse_word(j.at("z").get<std::string>()));
  if (j.contains("delta")) r.delta = parse_rational(j.at("delta").get<std::string>());
  r.seed = j.value("seed", std::uint64_t{0});
  r.source = j.value("source", std::string());
  return r;
}

json table_to_json(const FunctionTable& f) {
  json values = json::array();
  for (const auto& v : f.values) values.push_back({v.real(), v.imag()});
  json alphabet = json::array();
  for (auto s : f.alphabet) alphabet.push_back(static_cast<int>(s));
  return {{"n", f.n}, {"alphabet", alphabet}, {"values", values}};
}

FunctionTable table_from_json(const json& j) {
  FunctionTable f;
  f.n = j.at("n").get<int>();
  f.alphabet.clear();
  for (int s : j.at("alphabet")) f.alphabet.push_back(static_cast<std::uint8_t>(s));
  for (const auto& v : j.at("values")) {
    if (v.is_number()) f.values.emplace_back(v.get<double>(), 0.0);
    else f.values.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
  }
  std::size_t expect = 1;
  for (int i = 0; i < f.n; ++i) expect *= f.q();
  if (f.values.size() != expect) throw InvalidArgument("table has the wrong number of values");
  return f;
}

json product_to_json(const ProductFunction& p) {
  json factors = json::array();
  for (const auto& f : p.factors) {
    json row = json::array();
    for (const auto& c : f) row.push_back({c.real(), c.imag()});
    factors.push_back(row);
  }
  json alphabet = json::array();
  for (auto s : p.alphabet) alphabet.push_back(static_cast<int>(s));
  return {{"alphabet", alphabet}, {"factors", factors}};
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(path + ": " + e.what());
  }
}

void write_json(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace dhjlab
