#include "anderson/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace anderson {

namespace {

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "experiment", "d", "L", "N", "bc", "eps_schedule", "eps", "eps_levels",
      "eps_start", "a", "b", "replicas", "seed", "constants_method",
      "mollifier", "k", "residual_tol", "threads", "noise", "scale_L",
      "tail_n", "thresholds", "wells", "well_depth_c", "control_runs",
      "out_dir", "plots"};
  return keys;
}

std::size_t levenshtein(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string nearest_key(const std::string& key) {
  std::size_t best = static_cast<std::size_t>(-1);
  std::string name;
  for (const auto& k : known_keys()) {
    const std::size_t dist = levenshtein(key, k);
    if (dist < best) {
      best = dist;
      name = k;
    }
  }
  return name;
}

const std::vector<std::string>& experiments() {
  static const std::vector<std::string> v = {
      "spectrum", "converge", "scaling", "tail", "renorm", "bump",
      "kernel-check"};
  return v;
}

} // namespace

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config file not found: " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j,
                                  ValidationReport* report) {
  ValidationReport local;
  ValidationReport& rep = report ? *report : local;
  auto fail = [&](const std::string& msg) {
    rep.ok = false;
    rep.errors.push_back(msg);
  };

  if (!j.is_object()) {
    fail("config root must be a JSON object");
    if (!report) throw ConfigError(rep.errors.front());
    return {};
  }
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(known_keys().begin(), known_keys().end(), key) ==
        known_keys().end())
      fail("unknown key '" + key + "' (did you mean '" + nearest_key(key) +
           "'?)");
  }

  ExperimentConfig cfg;
  auto get_num = [&](const char* key, double& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) {
      fail(std::string(key) + ": expected a number");
      return;
    }
    out = j[key].get<double>();
  };
  auto get_int = [&](const char* key, auto& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_integer()) {
      fail(std::string(key) + ": expected an integer");
      return;
    }
    out = j[key].get<std::decay_t<decltype(out)>>();
  };

  if (j.contains("experiment")) {
    if (!j["experiment"].is_string()) {
      fail("experiment: expected a string");
    } else {
      cfg.experiment = j["experiment"].get<std::string>();
      if (std::find(experiments().begin(), experiments().end(),
                    cfg.experiment) == experiments().end())
        fail("experiment: '" + cfg.experiment +
             "' is not one of spectrum|converge|scaling|tail|renorm|bump|"
             "kernel-check");
    }
  }
  get_int("d", cfg.d);
  get_num("L", cfg.L);
  get_int("N", cfg.N);
  if (j.contains("bc")) {
    const std::string bc = j["bc"].is_string() ? j["bc"].get<std::string>() : "";
    if (bc == "dirichlet")
      cfg.bc = Bc::Dirichlet;
    else if (bc == "periodic")
      cfg.bc = Bc::Periodic;
    else
      fail("bc: expected \"dirichlet\" or \"periodic\"");
  }
  if (j.contains("eps_schedule")) {
    if (!j["eps_schedule"].is_array())
      fail("eps_schedule: expected an array of numbers");
    else
      for (const auto& v : j["eps_schedule"]) {
        if (!v.is_number())
          fail("eps_schedule: expected an array of numbers");
        else
          cfg.eps_schedule.push_back(v.get<double>());
      }
  } else if (j.contains("eps")) {
    if (!j["eps"].is_number())
      fail("eps: expected a number");
    else
      cfg.eps_schedule = {j["eps"].get<double>()};
  } else if (j.contains("eps_levels")) {
    int levels = 0;
    double start = 0.25;
    get_int("eps_levels", levels);
    get_num("eps_start", start);
    for (int i = 0; i < levels; ++i)
      cfg.eps_schedule.push_back(start * std::ldexp(1.0, -i));
  }
  get_num("a", cfg.a);
  get_num("b", cfg.b);
  get_int("replicas", cfg.replicas);
  get_int("seed", cfg.base_seed);
  if (j.contains("constants_method")) {
    const std::string m = j["constants_method"].is_string()
                              ? j["constants_method"].get<std::string>()
                              : "";
    if (m == "continuum")
      cfg.constants_method = ConstantsMethod::ContinuumQuadrature;
    else if (m == "lattice")
      cfg.constants_method = ConstantsMethod::LatticeSelfEnergy;
    else if (m == "montecarlo")
      cfg.constants_method = ConstantsMethod::MonteCarloOracle;
    else
      fail("constants_method: expected continuum|lattice|montecarlo");
  }
  if (j.contains("mollifier")) {
    if (!j["mollifier"].is_string())
      fail("mollifier: expected a string");
    else {
      cfg.mollifier = j["mollifier"].get<std::string>();
      try {
        MollifierProfile::by_name(cfg.mollifier);
      } catch (const ConfigError& e) {
        fail(e.what());
      }
    }
  }
  get_int("k", cfg.k);
  get_num("residual_tol", cfg.residual_tol);
  get_int("threads", cfg.threads);
  if (j.contains("noise")) {
    if (j["noise"].is_boolean())
      cfg.noise_on = j["noise"].get<bool>();
    else if (j["noise"].is_string())
      cfg.noise_on = j["noise"].get<std::string>() != "off";
    else
      fail("noise: expected a boolean or \"on\"/\"off\"");
  }
  get_num("scale_L", cfg.scale_L);
  get_int("tail_n", cfg.tail_n);
  get_int("thresholds", cfg.n_thresholds);
  get_int("wells", cfg.wells);
  get_num("well_depth_c", cfg.well_depth_c);
  if (j.contains("control_runs")) {
    if (j["control_runs"].is_boolean())
      cfg.control_runs = j["control_runs"].get<bool>();
    else
      fail("control_runs: expected a boolean");
  }

  if (rep.ok) {
    try {
      cfg.validate();
    } catch (const Error& e) {
      fail(e.what());
    }
  }

  // semantic warnings
  if (rep.ok) {
    const Grid grid(cfg.d, cfg.L, cfg.N, cfg.bc);
    const bool lattice_run = cfg.experiment == "spectrum" ||
                             cfg.experiment == "converge" ||
                             cfg.experiment == "scaling" ||
                             cfg.experiment == "tail";
    if (lattice_run)
      for (double eps : cfg.eps_schedule)
        if (eps < 2.0 * grid.h())
          rep.warnings.push_back("UnresolvedMollifier: eps=" +
                                 std::to_string(eps) + " below 2h");
    if (cfg.experiment == "tail" && cfg.d == 3)
      rep.warnings.push_back(
          "d=3 tail runs are trend-only: the exponent 1/2 regime is not "
          "reachable at desk scale");
    if (!cfg.eps_schedule.empty() && cfg.d >= 2) {
      const int n_a = GreensKernel(cfg.d, 1.0).cutoff_index();
      if (cfg.eps() > std::ldexp(1.0, -n_a))
        rep.warnings.push_back(
            "eps exceeds the kernel cutoff scale 2^-n_a: constants are "
            "cutoff-sensitive");
    }
  }

  if (!report && !rep.ok) {
    std::string msg = "config invalid:";
    for (const auto& e : rep.errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return cfg;
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["experiment"] = cfg.experiment;
  j["d"] = cfg.d;
  j["L"] = cfg.L;
  j["N"] = cfg.N;
  j["bc"] = cfg.bc == Bc::Dirichlet ? "dirichlet" : "periodic";
  j["eps_schedule"] = cfg.eps_schedule;
  j["a"] = cfg.a;
  j["b"] = cfg.b;
  j["replicas"] = cfg.replicas;
  j["seed"] = cfg.base_seed;
  j["constants_method"] = method_name(cfg.constants_method);
  j["mollifier"] = cfg.mollifier;
  j["k"] = cfg.k;
  j["residual_tol"] = cfg.residual_tol;
  j["noise"] = cfg.noise_on;
  j["scale_L"] = cfg.scale_L;
  j["tail_n"] = cfg.tail_n;
  j["thresholds"] = cfg.n_thresholds;
  j["wells"] = cfg.wells;
  j["well_depth_c"] = cfg.well_depth_c;
  j["control_runs"] = cfg.control_runs;
  return j;
}

ValidationReport validate_config_json(const nlohmann::json& j) {
  ValidationReport rep;
  config_from_json(j, &rep);
  return rep;
}

} // namespace anderson
