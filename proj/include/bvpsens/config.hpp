#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>

#include "bvpsens/problem.hpp"

namespace bvpsens {

/// Build a ProblemSpec from the JSON config schema:
///   {"n": int, "interval": [a, b], "points": [...], "multiplicities": [...],
///    "data": [[...], ...], "p": real, "c": real, "d": real, "rhs": "..."}
/// or {"builtin": "t1_linear" | "t2_pendulum"}.
/// Throws ConfigError on shape problems and ParseError on bad rhs text.
ProblemSpec problem_from_json(const nlohmann::json& j);

/// Parse the file at `path` (JSON parse errors carry the location).
ProblemSpec load_problem_file(const std::string& path);

}  // namespace bvpsens
