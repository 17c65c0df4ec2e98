#pragma once

#include "dhjlab/corr.hpp"
#include "dhjlab/cube.hpp"
#include "dhjlab/dist.hpp"
#include "dhjlab/restrict.hpp"

#include <json.hpp>

#include <string>

namespace dhjlab {

/// {"n", "side", "points": [words as digit strings]}
nlohmann::json set_to_json(const CubeSet& set);
CubeSet set_from_json(const nlohmann::json& j);

/// {"alphabets": [[symbols]], "rows": [{"t": [ints], "p": {"num", "den"}}]}
nlohmann::json dist_to_json(const JointDist& d);
JointDist dist_from_json(const nlohmann::json& j);

/// {"n", "I", "z", "delta", "seed"}; I is 0-based, z a digit string.
nlohmann::json restriction_to_json(const Restriction& r);
Restriction restriction_from_json(const nlohmann::json& j);

/// {"n", "alphabet", "values": [[re, im]]}
nlohmann::json table_to_json(const FunctionTable& f);
FunctionTable table_from_json(const nlohmann::json& j);

nlohmann::json product_to_json(const ProductFunction& p);

nlohmann::json read_json_file(const std::string& path);
/// Pretty-printed with a trailing newline; "-" writes to standard output.
void write_json(const nlohmann::json& j, const std::string& path);

}  // namespace dhjlab
