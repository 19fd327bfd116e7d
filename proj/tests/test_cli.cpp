#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct RunResult {
  int exit_code;
  std::string out;
};

RunResult run_cli(const std::string& args, bool merge_stderr = false) {
  std::string cmd = std::string(BVPSENS_CLI) + " " + args +
                    (merge_stderr ? " 2>&1" : " 2>/dev/null");
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, got);
  int status = pclose(pipe);
  return {WEXITSTATUS(status), std::move(out)};
}

std::string config(const std::string& name) {
  return std::string(BVPSENS_CONFIG_DIR) + "/" + name;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

const std::vector<std::string>* find_row(
    const std::vector<std::vector<std::string>>& rows, double x) {
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (std::abs(std::stod(rows[i][0]) - x) < 1e-9) return &rows[i];
  return nullptr;
}

std::string write_temp(const std::string& name, const std::string& body) {
  std::ofstream out(name);
  out << body;
  return name;
}

}  // namespace

TEST_CASE("solve prints the linear solution on the default grid") {
  RunResult r = run_cli("solve " + config("t1_linear.json"));
  REQUIRE(r.exit_code == 0);
  auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 202);  // header + 201 points
  CHECK(rows[0] == std::vector<std::string>{"x", "u0", "u1"});
  const auto* row = find_row(rows, 0.5);
  REQUIRE(row != nullptr);
  CHECK(std::abs(std::stod((*row)[1]) - 0.5) <= 1e-10);
  CHECK(std::abs(std::stod((*row)[2]) - 1.0) <= 1e-10);
}

TEST_CASE("malformed JSON exits 1 with a parse location") {
  std::string path = write_temp("bad_config.json", "{\"n\": 2, ");
  RunResult r = run_cli("solve " + path, true);
  CHECK(r.exit_code == 1);
  CHECK(r.out.find("parse error") != std::string::npos);
}

TEST_CASE("missing config file exits 1") {
  RunResult r = run_cli("solve no_such_file.json");
  CHECK(r.exit_code == 1);
}

TEST_CASE("invalid problem exits 1 naming the constraint") {
  std::string path = write_temp(
      "bad_order.json",
      R"({"n": 2, "interval": [-1, 4], "points": [0, 1], "multiplicities": [1, 1],
          "data": [[0], [3]], "p": 1, "c": 0.5, "d": 2.5, "rhs": "0"})");
  RunResult r = run_cli("solve " + path, true);
  CHECK(r.exit_code == 1);
  CHECK(r.out.find("x_k < c") != std::string::npos);
}

TEST_CASE("singular boundary matrix exits 3") {
  RunResult r = run_cli("sens " + config("t1_singular.json"), true);
  CHECK(r.exit_code == 3);
  CHECK(r.out.find("DisconjugacyViolation") != std::string::npos);
}

TEST_CASE("sens emits closed-form columns") {
  RunResult r = run_cli("sens " + config("t1_linear.json") + " --datum y:0:2");
  REQUIRE(r.exit_code == 0);
  auto rows = parse_csv(r.out);
  CHECK(rows[0] == std::vector<std::string>{"x", "y:0:2"});
  for (std::size_t i = 1; i < rows.size(); i += 20) {
    double x = std::stod(rows[i][0]);
    CHECK(std::abs(std::stod(rows[i][1]) - x / 3.0) <= 1e-8);
  }

  r = run_cli("sens " + config("t1_linear.json") + " --datum p");
  REQUIRE(r.exit_code == 0);
  rows = parse_csv(r.out);
  for (std::size_t i = 1; i < rows.size(); i += 20) {
    double x = std::stod(rows[i][0]);
    CHECK(std::abs(std::stod(rows[i][1]) + 2.0 * x / 3.0) <= 1e-8);
  }
}

TEST_CASE("grid flag controls the row count") {
  RunResult r = run_cli("solve " + config("t1_linear.json") + " --grid 11");
  REQUIRE(r.exit_code == 0);
  CHECK(parse_csv(r.out).size() == 12);
}

TEST_CASE("missing subcommand or config exits 1") {
  CHECK(run_cli("").exit_code == 1);
  CHECK(run_cli("solve").exit_code == 1);
}

TEST_CASE("unknown datum strings exit 1") {
  CHECK(run_cli("sens " + config("t1_linear.json") + " --datum q").exit_code ==
        1);
  CHECK(run_cli("sens " + config("t1_linear.json") + " --datum y:0:9")
            .exit_code == 1);
}

TEST_CASE("verify emits a passing JSON report for the linear fixture") {
  RunResult r = run_cli("verify " + config("t1_linear.json"));
  REQUIRE(r.exit_code == 0);
  nlohmann::json j = nlohmann::json::parse(r.out);
  CHECK(j["pass"] == true);
  REQUIRE(j["results"].size() == 7);
  for (const auto& row : j["results"]) {
    CHECK(row["pass"] == true);
    CHECK(row["sup_rel"].get<double>() <= 1e-6);
  }
}

TEST_CASE("verify with --paper-signs exits 4 and fails exactly c and d") {
  RunResult r = run_cli("verify " + config("t1_linear.json") + " --paper-signs");
  CHECK(r.exit_code == 4);
  nlohmann::json j = nlohmann::json::parse(r.out);
  CHECK(j["pass"] == false);
  for (const auto& row : j["results"]) {
    std::string datum = row["datum"].get<std::string>();
    bool is_cd = datum == "c" || datum == "d";
    CHECK(row["pass"] == !is_cd);
    if (is_cd) CHECK(row["sup_abs"].get<double>() >= 0.1);
  }
}

TEST_CASE("sweep ratios on the linear fixture are one decade") {
  RunResult r =
      run_cli("sweep " + config("t1_linear.json") + " --deltas 1e-2,1e-3");
  REQUIRE(r.exit_code == 0);
  auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 1 + 14);  // header + 7 data x 2 deltas
  CHECK(rows[0] == std::vector<std::string>{"datum", "delta", "sup_deviation",
                                            "ratio_to_prev"});
  int ratios = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    double ratio = std::stod(rows[i][3]);
    if (std::isnan(ratio)) continue;
    CHECK(ratio >= 9.9);
    CHECK(ratio <= 10.1);
    ++ratios;
  }
  CHECK(ratios == 7);
}

TEST_CASE("empty delta list exits 1") {
  RunResult r =
      run_cli("sweep " + config("t1_linear.json") + " --deltas \"\"", true);
  CHECK(r.exit_code == 1);
}

TEST_CASE("exhausted Newton budget exits 2 naming MaxIterations") {
  RunResult r =
      run_cli("solve " + config("t2_pendulum.json") + " --max-iter 1", true);
  CHECK(r.exit_code == 2);
  CHECK(r.out.find("MaxIterations") != std::string::npos);
}

TEST_CASE("blow-up exits 2 naming ExtensionFailure") {
  std::string path = write_temp(
      "blowup.json",
      R"({"n": 2, "interval": [-1, 4], "points": [0, 1], "multiplicities": [1, 1],
          "data": [[0], [100]], "p": 1, "c": 1.5, "d": 2.5,
          "rhs": "1 + y0^2 + y1^2"})");
  RunResult r = run_cli("solve " + path, true);
  CHECK(r.exit_code == 2);
  CHECK(r.out.find("ExtensionFailure") != std::string::npos);
}

TEST_CASE("bad guess list exits 1") {
  RunResult r =
      run_cli("solve " + config("t1_linear.json") + " --guess 1.0,oops", true);
  CHECK(r.exit_code == 1);
}

TEST_CASE("verify output is byte-identical across runs") {
  RunResult a = run_cli("verify " + config("t2_pendulum.json"));
  RunResult b = run_cli("verify " + config("t2_pendulum.json"));
  CHECK(a.exit_code == 0);
  CHECK(a.out == b.out);
  CHECK(!a.out.empty());
}

TEST_CASE("solve output is byte-identical across runs") {
  RunResult a = run_cli("solve " + config("t2_pendulum.json"));
  RunResult b = run_cli("solve " + config("t2_pendulum.json"));
  CHECK(a.out == b.out);
}
