#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "anderson/config.hpp"
#include "anderson/io.hpp"
#include "anderson/runner.hpp"

using namespace anderson;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  REQUIRE(static_cast<bool>(is));
  return std::string((std::istreambuf_iterator<char>(is)),
                     std::istreambuf_iterator<char>());
}

} // namespace

TEST_CASE("replica seeds are independent and reproducible") {
  CHECK(replica_seed(1, 0) == replica_seed(1, 0));
  CHECK(replica_seed(1, 0) != replica_seed(1, 1));
  CHECK(replica_seed(1, 0) != replica_seed(2, 0));
}

TEST_CASE("converge: coupling and Cauchy trend in d=1") {
  ExperimentConfig cfg;
  cfg.experiment = "converge";
  cfg.d = 1;
  cfg.L = 1.0;
  cfg.N = 512;
  cfg.eps_schedule = {0.25, 0.125, 0.0625, 0.03125};
  cfg.replicas = 12;
  cfg.k = 2;
  cfg.base_seed = 7;
  auto res = run_convergence(cfg);
  REQUIRE(res.rows.size() == 12 * 4);
  CHECK(res.monotone_fraction >= 0.8);
  CHECK_FALSE(res.has_control); // d=1 has no renormalisation

  // thread count must not change results
  cfg.threads = 1;
  auto serial = run_convergence(cfg);
  for (std::size_t i = 0; i < res.rows.size(); ++i)
    CHECK(serial.rows[i].eigenvalues == res.rows[i].eigenvalues);
}

TEST_CASE("converge: control drift in d=2 matches the log divergence") {
  ExperimentConfig cfg;
  cfg.experiment = "converge";
  cfg.d = 2;
  cfg.L = 1.0;
  cfg.N = 128;
  cfg.eps_schedule = {0.25, 0.125, 0.0625, 0.03125};
  cfg.replicas = 10;
  cfg.k = 1;
  cfg.base_seed = 3;
  auto res = run_convergence(cfg);
  REQUIRE(res.has_control);
  // lambda_1 without C_eps drifts like (2 pi)^-1 ln eps (downwards)
  const double target = 1.0 / (2.0 * M_PI);
  CHECK(res.control_slope > 0.0); // slope against ln(eps) is positive
  CHECK(std::abs(res.control_slope - target) < 0.25 * target);
}

TEST_CASE("independent seeds give uncorrelated spectra") {
  ExperimentConfig cfg;
  cfg.experiment = "spectrum";
  cfg.d = 1;
  cfg.N = 256;
  cfg.eps_schedule = {0.125};
  cfg.replicas = 40;
  cfg.k = 1;
  cfg.base_seed = 11;
  auto a = run_spectrum(cfg);
  cfg.base_seed = 12;
  auto b = run_spectrum(cfg);
  double ma = 0, mb = 0;
  for (int r = 0; r < 40; ++r) {
    ma += a.replicas[static_cast<std::size_t>(r)].eigenvalues[0];
    mb += b.replicas[static_cast<std::size_t>(r)].eigenvalues[0];
  }
  ma /= 40;
  mb /= 40;
  double cov = 0, va = 0, vb = 0;
  for (int r = 0; r < 40; ++r) {
    const double xa = a.replicas[static_cast<std::size_t>(r)].eigenvalues[0] - ma;
    const double xb = b.replicas[static_cast<std::size_t>(r)].eigenvalues[0] - mb;
    cov += xa * xb;
    va += xa * xa;
    vb += xb * xb;
  }
  CHECK(std::abs(cov / std::sqrt(va * vb)) < 0.45); // ~N(0, 1/sqrt(40))
}

TEST_CASE("scaling identity: free field is exact, noisy field within bounds") {
  ExperimentConfig cfg;
  cfg.experiment = "scaling";
  cfg.d = 1; // C = 0: identity reduces to pure Laplacian scaling
  cfg.N = 128;
  cfg.eps_schedule = {0.125};
  cfg.replicas = 4;
  cfg.k = 3;
  cfg.scale_L = 2.0;
  auto res = run_scaling(cfg);
  CHECK(res.identity_failures == 0);
  for (const auto& row : res.rows)
    for (double gap : row.identity_gap) CHECK(std::abs(gap) < row.tolerance);

  ExperimentConfig cfg2 = cfg;
  cfg2.d = 2;
  cfg2.N = 64;
  cfg2.eps_schedule = {0.125};
  cfg2.replicas = 6;
  auto res2 = run_scaling(cfg2);
  CHECK(res2.identity_failures == 0);
  CHECK(res2.delta_pred > 0.0); // d=2: delta_L positive at small eps
}

TEST_CASE("tail record: monotone cdf and sane fit on a small run") {
  ExperimentConfig cfg;
  cfg.experiment = "tail";
  cfg.d = 1;
  cfg.L = 5.0;
  cfg.N = 1024;
  cfg.eps_schedule = {2.0 * 10.0 / 1024.0};
  cfg.replicas = 400;
  cfg.k = 1;
  cfg.tail_n = 1;
  cfg.base_seed = 21;
  auto rec = run_tail(cfg);
  CHECK(rec.monotone_cdf);
  CHECK(rec.target == doctest::Approx(1.5));
  CHECK(rec.slope > 0.5);
  CHECK(rec.slope < 3.0);
  long long deepest = 0;
  for (const auto& th : rec.thresholds)
    if (th.used_in_fit) deepest = th.exceedances;
  CHECK(deepest >= 30);
}

TEST_CASE("tail: insufficient mass raises") {
  ExperimentConfig cfg;
  cfg.experiment = "tail";
  cfg.d = 1;
  cfg.L = 1.0; // ground state stays positive on a small box
  cfg.N = 256;
  cfg.eps_schedule = {0.05};
  cfg.replicas = 60;
  cfg.k = 1;
  CHECK_THROWS_AS(run_tail(cfg), InsufficientTailMass);
}

TEST_CASE("bump sandwich for one and three wells") {
  ExperimentConfig cfg;
  cfg.experiment = "bump";
  cfg.d = 1;
  cfg.L = 2.0;
  cfg.N = 1024;
  cfg.wells = 1;
  cfg.well_depth_c = 1.0;
  auto res = run_bump(cfg);
  CHECK(res.sandwich_ok);
  CHECK(res.lambdas[0] >= res.plateau_b);
  CHECK(res.lambdas[0] <= -3.0);
  CHECK(res.free_lambda1 > 0.0);

  ExperimentConfig cfg3 = cfg;
  cfg3.L = 5.0;
  cfg3.N = 2048;
  cfg3.wells = 3;
  auto res3 = run_bump(cfg3);
  CHECK(res3.sandwich_ok);
  CHECK(res3.lambdas[2] <= -3.0);

  ExperimentConfig bad = cfg;
  bad.wells = 3; // three wells cannot fit in (-2,2)
  CHECK_THROWS_AS(run_bump(bad), GeometryError);
}

TEST_CASE("config json round trip and validation messages") {
  nlohmann::json j = {{"experiment", "spectrum"}, {"d", 1},    {"L", 1.0},
                      {"N", 64},                  {"eps", 0.2}, {"replicas", 2}};
  auto rep = validate_config_json(j);
  CHECK(rep.ok);
  CHECK(rep.errors.empty());

  nlohmann::json bad = j;
  bad["replcias"] = 3; // typo
  auto rep2 = validate_config_json(bad);
  CHECK_FALSE(rep2.ok);
  REQUIRE(rep2.errors.size() == 1);
  CHECK(rep2.errors[0].find("replcias") != std::string::npos);
  CHECK(rep2.errors[0].find("replicas") != std::string::npos); // suggestion

  nlohmann::json warn = j;
  warn["eps"] = 0.01; // below 2h for N=64
  auto rep3 = validate_config_json(warn);
  CHECK(rep3.ok);
  REQUIRE_FALSE(rep3.warnings.empty());
  CHECK(rep3.warnings[0].find("UnresolvedMollifier") != std::string::npos);
}

TEST_CASE("runner: determinism of produced CSV bytes") {
  nlohmann::json j = {{"d", 1},    {"L", 1.0},      {"N", 256},
                      {"eps", 0.1}, {"replicas", 3}, {"k", 2},
                      {"seed", 9}};
  auto out1 = run_experiment("spectrum", j, "exp_run_a");
  REQUIRE(out1.exit_code == 0);
  auto out2 = run_experiment("spectrum", j, "exp_run_b");
  REQUIRE(out2.exit_code == 0);
  CHECK(slurp("exp_run_a/spectrum.csv") == slurp("exp_run_b/spectrum.csv"));
  // manifests agree up to the timestamp line
  auto strip_ts = [](std::string s) {
    const auto pos = s.find("\"timestamp\"");
    const auto end = s.find('\n', pos);
    return s.erase(pos, end - pos);
  };
  CHECK(strip_ts(slurp("exp_run_a/manifest.json")) ==
        strip_ts(slurp("exp_run_b/manifest.json")));
  std::filesystem::remove_all("exp_run_a");
  std::filesystem::remove_all("exp_run_b");
}

TEST_CASE("runner: config errors give exit code 2, kernel-check passes") {
  nlohmann::json bad = {{"d", 5}};
  auto out = run_experiment("spectrum", bad, "exp_run_bad");
  CHECK(out.exit_code == 2);
  std::filesystem::remove_all("exp_run_bad");

  nlohmann::json kc = {{"d", 1}, {"a", 1.0}, {"L", 1.0}, {"N", 64}};
  auto out2 = run_experiment("kernel-check", kc, "exp_run_kc");
  CHECK(out2.exit_code == 0);
  CHECK(slurp("exp_run_kc/kernel_check.csv").find("ok,1") != std::string::npos);
  std::filesystem::remove_all("exp_run_kc");
}

TEST_CASE("renorm run: row count and d=2 slope summary") {
  ExperimentConfig cfg;
  cfg.experiment = "renorm";
  cfg.d = 2;
  cfg.a = 1.0;
  cfg.eps_schedule = {0.25, 0.125, 0.0625, 0.03125};
  auto res = run_renorm(cfg);
  CHECK(res.rows.size() == 4);
  CHECK(res.slope_vs_log_eps < 0.0);
  REQUIRE(res.mc_cross.has_value());
  const auto& last = res.rows.back();
  CHECK(std::abs(last.c1 - res.mc_cross->value) <
        4.0 * (res.mc_cross->sigma + last.error_estimate));
}
