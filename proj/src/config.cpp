#include "bvpsens/config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "bvpsens/errors.hpp"

namespace bvpsens {

namespace {

using nlohmann::json;

const json& field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end())
    throw ConfigError(std::string("config is missing required field \"") +
                      key + "\"");
  return *it;
}

double as_number(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number())
    throw ConfigError(std::string("config field \"") + key +
                      "\" must be a number");
  return v.get<double>();
}

}  // namespace

ProblemSpec problem_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (j.contains("builtin")) {
    const json& b = j.at("builtin");
    if (!b.is_string())
      throw ConfigError("config field \"builtin\" must be a string");
    return builtin_problem(b.get<std::string>());
  }

  ProblemSpec s;
  const json& n = field(j, "n");
  if (!n.is_number_integer())
    throw ConfigError("config field \"n\" must be an integer");
  s.n = n.get<int>();

  const json& interval = field(j, "interval");
  if (!interval.is_array() || interval.size() != 2 ||
      !interval[0].is_number() || !interval[1].is_number())
    throw ConfigError("config field \"interval\" must be [a, b]");
  s.a = interval[0].get<double>();
  s.b = interval[1].get<double>();

  const json& points = field(j, "points");
  if (!points.is_array() || points.empty())
    throw ConfigError("config field \"points\" must be a nonempty array");
  for (const json& v : points) {
    if (!v.is_number())
      throw ConfigError("config field \"points\" must hold numbers");
    s.points.push_back(v.get<double>());
  }

  const json& mults = field(j, "multiplicities");
  if (!mults.is_array())
    throw ConfigError("config field \"multiplicities\" must be an array");
  for (const json& v : mults) {
    if (!v.is_number_integer())
      throw ConfigError("config field \"multiplicities\" must hold integers");
    s.multiplicities.push_back(v.get<int>());
  }

  const json& data = field(j, "data");
  if (!data.is_array())
    throw ConfigError("config field \"data\" must be an array of arrays");
  for (const json& row : data) {
    if (!row.is_array())
      throw ConfigError("config field \"data\" must be an array of arrays");
    std::vector<double> values;
    for (const json& v : row) {
      if (!v.is_number())
        throw ConfigError("config field \"data\" must hold numbers");
      values.push_back(v.get<double>());
    }
    s.data.push_back(std::move(values));
  }

  s.p = as_number(j, "p");
  s.c = as_number(j, "c");
  s.d = as_number(j, "d");

  const json& rhs = field(j, "rhs");
  if (!rhs.is_string())
    throw ConfigError("config field \"rhs\" must be an expression string");
  s.rhs = parse_expr(rhs.get<std::string>());
  return s;
}

ProblemSpec load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j = json::parse(in);  // json parse errors carry the byte position
  return problem_from_json(j);
}

}  // namespace bvpsens
