// Command-line front end. All numerical work happens behind the C API in
// libanderson; this binary only parses flags, merges them over an optional
// JSON config file, dispatches the run and maps status codes to exit codes.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "anderson.h"

namespace {

int status_to_exit(anderson_status st) {
  switch (st) {
    case ANDERSON_OK: return 0;
    case ANDERSON_ECONFIG: return 2;
    case ANDERSON_EPARTIAL: return 4;
    default: return 3;
  }
}

struct CommonFlags {
  std::string config_path;
  std::string out_dir = "out";
  bool plots = false;
  int d = 0;
  double L = 0.0;
  int N = 0;
  std::string bc;
  std::vector<double> eps_schedule;
  double eps = 0.0;
  int eps_levels = 0;
  double eps_start = 0.25;
  double a = 0.0, b = -10.0;
  int replicas = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string method;
  std::string mollifier;
  int k = 0;
  int threads = -1;
  std::string noise;
  double scale_L = 0.0;
  int tail_n = 0;
  int thresholds = 0;
  int wells = 0;
  double depth_c = 0.0;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file");
  cmd->add_option("--out", f.out_dir, "output directory");
  cmd->add_flag("--plots", f.plots, "emit static SVG plots");
  cmd->add_option("--d", f.d, "dimension (1, 2 or 3)");
  cmd->add_option("--L", f.L, "half-width of the box");
  cmd->add_option("--N", f.N, "lattice cells per axis (even)");
  cmd->add_option("--bc", f.bc, "dirichlet|periodic");
  cmd->add_option("--eps", f.eps, "single mollification scale");
  cmd->add_option("--eps-levels", f.eps_levels, "number of dyadic eps levels");
  cmd->add_option("--eps-start", f.eps_start, "largest eps of the schedule");
  cmd->add_option("--a", f.a, "resolvent shift a");
  cmd->add_option("--b", f.b, "fixed-point offset b in (-2,2)");
  cmd->add_option("--replicas", f.replicas, "Monte-Carlo replicas");
  cmd->add_option("--seed", f.seed, "base seed")->each([&](const std::string&) {
    f.seed_set = true;
  });
  cmd->add_option("--method", f.method, "constants method: continuum|lattice|montecarlo");
  cmd->add_option("--mollifier", f.mollifier, "mollifier profile name");
  cmd->add_option("--k", f.k, "eigenpairs per solve");
  cmd->add_option("--threads", f.threads, "replica pool size (0 = cores)");
  cmd->add_option("--noise", f.noise, "on|off (spectrum subcommand)");
  cmd->add_option("--scale-L", f.scale_L, "dilation factor (scaling)");
  cmd->add_option("--tail-n", f.tail_n, "eigenvalue index for the tail fit");
  cmd->add_option("--thresholds", f.thresholds, "tail threshold count");
  cmd->add_option("--wells", f.wells, "number of bump wells");
  cmd->add_option("--depth-c", f.depth_c, "bump well depth parameter c");
}

nlohmann::json merge_config(const CommonFlags& f) {
  nlohmann::json j;
  if (!f.config_path.empty()) {
    std::ifstream is(f.config_path);
    if (!is) throw std::runtime_error("config file not found: " + f.config_path);
    is >> j;
  }
  // flag overrides take precedence over file values
  if (f.d > 0) j["d"] = f.d;
  if (f.L > 0) j["L"] = f.L;
  if (f.N > 0) j["N"] = f.N;
  if (!f.bc.empty()) j["bc"] = f.bc;
  if (f.eps > 0) {
    j["eps_schedule"] = {f.eps};
    j.erase("eps_levels");
  }
  if (f.eps_levels > 0) {
    std::vector<double> sched;
    for (int i = 0; i < f.eps_levels; ++i)
      sched.push_back(f.eps_start * std::pow(2.0, -i));
    j["eps_schedule"] = sched;
  }
  if (f.a > 0) j["a"] = f.a;
  if (f.b > -2.0) j["b"] = f.b;
  if (f.replicas > 0) j["replicas"] = f.replicas;
  if (f.seed_set) j["seed"] = f.seed;
  if (!f.method.empty()) j["constants_method"] = f.method;
  if (!f.mollifier.empty()) j["mollifier"] = f.mollifier;
  if (f.k > 0) j["k"] = f.k;
  if (f.threads >= 0) j["threads"] = f.threads;
  if (!f.noise.empty()) j["noise"] = f.noise;
  if (f.scale_L > 0) j["scale_L"] = f.scale_L;
  if (f.tail_n > 0) j["tail_n"] = f.tail_n;
  if (f.thresholds > 0) j["thresholds"] = f.thresholds;
  if (f.wells > 0) j["wells"] = f.wells;
  if (f.depth_c > 0) j["well_depth_c"] = f.depth_c;
  return j;
}

int run(const std::string& subcommand, const CommonFlags& f) {
  nlohmann::json j;
  try {
    j = merge_config(f);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  const std::string config = j.dump();
  const anderson_status st = anderson_run_json(subcommand.c_str(),
                                               config.c_str(),
                                               f.out_dir.c_str(), f.plots);
  if (st != ANDERSON_OK)
    std::cerr << "anderson " << subcommand << ": " << anderson_last_error()
              << "\n";
  else
    std::cout << "wrote results to " << f.out_dir << "\n";
  return status_to_exit(st);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anderson hamiltonian simulator (renormalised -Delta + xi_eps + C_eps)"};
  app.require_subcommand(1);

  const std::vector<std::string> subcommands = {
      "spectrum", "converge", "scaling", "tail", "renorm", "bump",
      "kernel-check"};
  std::vector<CommonFlags> flags(subcommands.size());
  for (std::size_t i = 0; i < subcommands.size(); ++i) {
    auto* cmd = app.add_subcommand(subcommands[i]);
    add_common(cmd, flags[i]);
  }

  std::string validate_path;
  auto* val = app.add_subcommand("validate", "check a config file");
  val->add_option("config", validate_path, "JSON config file")->required();

  CLI11_PARSE(app, argc, argv);

  if (val->parsed()) {
    std::ifstream is(validate_path);
    if (!is) {
      std::cerr << "error: config file not found: " << validate_path << "\n";
      return 2;
    }
    std::string content((std::istreambuf_iterator<char>(is)),
                        std::istreambuf_iterator<char>());
    char report[8192];
    const anderson_status st =
        anderson_validate_config(content.c_str(), report, sizeof report);
    std::cout << report;
    return status_to_exit(st);
  }

  for (std::size_t i = 0; i < subcommands.size(); ++i)
    if (app.get_subcommand(subcommands[i])->parsed())
      return run(subcommands[i], flags[i]);
  return 2;
}
