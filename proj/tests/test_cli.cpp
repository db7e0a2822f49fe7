#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#ifndef ANDERSON_CLI_PATH
#define ANDERSON_CLI_PATH "anderson"
#endif

namespace {

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(ANDERSON_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  REQUIRE(static_cast<bool>(is));
  return std::string((std::istreambuf_iterator<char>(is)),
                     std::istreambuf_iterator<char>());
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream is(path);
  REQUIRE(static_cast<bool>(is));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

} // namespace

TEST_CASE("spectrum subcommand reproduces the free Dirichlet ground state") {
  REQUIRE(run_cli("spectrum --d 1 --L 1 --N 2048 --noise off --k 5 "
                  "--out cli_spec") == 0);
  auto rows = read_csv("cli_spec/spectrum.csv");
  REQUIRE(rows.size() == 6); // header + 5 eigenvalues
  CHECK(rows[0][0] == "replica");
  const double lambda1 = std::stod(rows[1][2]);
  CHECK(std::abs(lambda1 - 2.4674) < 1e-3);
  std::filesystem::remove_all("cli_spec");
}

TEST_CASE("renorm subcommand: row-count contract and slope summary") {
  REQUIRE(run_cli("renorm --d 2 --a 1 --eps-levels 6 --out cli_renorm") == 0);
  auto rows = read_csv("cli_renorm/renorm.csv");
  REQUIRE(rows.size() == 7); // header + 6 eps levels
  auto summary = read_csv("cli_renorm/renorm_summary.csv");
  REQUIRE(summary.size() == 2);
  const double slope = std::stod(summary[1][0]);
  CHECK(std::abs(slope - (-1.0 / (2.0 * M_PI))) < 0.1 / (2.0 * M_PI));
  std::filesystem::remove_all("cli_renorm");
}

TEST_CASE("reruns with an identical config are byte-identical") {
  REQUIRE(run_cli("spectrum --d 1 --L 1 --N 512 --eps 0.05 --replicas 3 "
                  "--seed 4 --out cli_rep_a") == 0);
  REQUIRE(run_cli("spectrum --d 1 --L 1 --N 512 --eps 0.05 --replicas 3 "
                  "--seed 4 --out cli_rep_b") == 0);
  CHECK(slurp("cli_rep_a/spectrum.csv") == slurp("cli_rep_b/spectrum.csv"));
  std::filesystem::remove_all("cli_rep_a");
  std::filesystem::remove_all("cli_rep_b");
}

TEST_CASE("config file with flag overrides, plots flag-gated") {
  {
    std::ofstream os("cli_cfg.json");
    os << "{\"d\":1,\"L\":1.0,\"N\":256,\"eps\":0.1,\"replicas\":2,\"k\":2}";
  }
  REQUIRE(run_cli("converge --config cli_cfg.json --eps-levels 3 "
                  "--eps-start 0.2 --plots --out cli_conv") == 0);
  auto rows = read_csv("cli_conv/converge.csv");
  CHECK(rows.size() == 1 + 2 * 3 * 2); // header + replicas x levels x k
  CHECK(std::filesystem::exists("cli_conv/converge.svg"));
  std::filesystem::remove("cli_cfg.json");
  std::filesystem::remove_all("cli_conv");
}

TEST_CASE("validate subcommand reports errors and warnings") {
  {
    std::ofstream os("cli_ok.json");
    os << "{\"d\":1,\"N\":64,\"eps\":0.25}";
  }
  CHECK(run_cli("validate cli_ok.json") == 0);
  {
    std::ofstream os("cli_warn.json");
    os << "{\"experiment\":\"spectrum\",\"d\":1,\"N\":64,\"eps\":0.015}";
  }
  CHECK(run_cli("validate cli_warn.json") == 0); // warning, not an error
  {
    std::ofstream os("cli_bad.json");
    os << "{\"replcias\": 4}";
  }
  CHECK(run_cli("validate cli_bad.json") == 2);
  std::filesystem::remove("cli_ok.json");
  std::filesystem::remove("cli_warn.json");
  std::filesystem::remove("cli_bad.json");
}

TEST_CASE("exit codes: config error 2, geometry error 2") {
  CHECK(run_cli("spectrum --d 5 --out cli_bad_run") == 2);
  CHECK(run_cli("bump --d 1 --L 2 --N 256 --wells 3 --out cli_bad_bump") == 2);
  std::filesystem::remove_all("cli_bad_run");
  std::filesystem::remove_all("cli_bad_bump");
}
