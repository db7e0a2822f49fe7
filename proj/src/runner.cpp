#include "anderson/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>

#include "anderson/config.hpp"
#include "anderson/io.hpp"

namespace anderson {

namespace {

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

} // namespace

RunOutcome run_experiment(const std::string& subcommand,
                          const nlohmann::json& config,
                          const std::string& out_dir, bool plots) {
  RunOutcome out;
  nlohmann::json j = config;
  j["experiment"] = subcommand;

  ExperimentConfig cfg;
  try {
    cfg = config_from_json(j);
  } catch (const ConfigError& e) {
    out.exit_code = 2;
    out.message = e.what();
    return out;
  } catch (const GeometryError& e) {
    out.exit_code = 2;
    out.message = e.what();
    return out;
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  auto path = [&](const std::string& name) { return out_dir + "/" + name; };

  Manifest manifest;
  manifest.experiment = cfg.experiment;
  manifest.config_json = config_to_json(cfg).dump();
  manifest.timestamp = iso_timestamp();
  for (int r = 0; r < cfg.replicas; ++r)
    manifest.replica_seeds.push_back(replica_seed(cfg.base_seed, r));

  try {
    if (cfg.experiment == "spectrum") {
      auto res = run_spectrum(cfg);
      write_spectrum_run_csv(res, path("spectrum.csv"));
      out.outputs = {"spectrum.csv"};
      bool all_ok = true;
      for (const auto& s : res.replicas) all_ok = all_ok && s.converged;
      if (!all_ok) {
        out.exit_code = 4;
        out.message = "partial: some eigensolves did not certify";
      }
    } else if (cfg.experiment == "converge") {
      auto res = run_convergence(cfg);
      write_convergence_csv(res, cfg, path("converge.csv"));
      out.outputs = {"converge.csv"};
      if (plots) {
        std::vector<PlotSeries> series(1);
        for (std::size_t i = 0; i < cfg.eps_schedule.size(); ++i) {
          double mean = 0.0;
          for (int r = 0; r < cfg.replicas; ++r)
            mean += res.rows[static_cast<std::size_t>(r) * cfg.eps_schedule.size() + i]
                        .eigenvalues[0];
          series[0].x.push_back(cfg.eps_schedule[i]);
          series[0].y.push_back(mean / cfg.replicas);
        }
        series[0].label = "mean lambda_1";
        write_svg_plot(path("converge.svg"), series, "eigenvalue vs eps",
                       "eps", "lambda_1", true, false);
        out.outputs.push_back("converge.svg");
      }
    } else if (cfg.experiment == "scaling") {
      auto res = run_scaling(cfg);
      write_scaling_csv(res, path("scaling.csv"));
      out.outputs = {"scaling.csv"};
      if (res.identity_failures > 0) {
        out.exit_code = 4;
        out.message = "partial: " + std::to_string(res.identity_failures) +
                      " replicas violated the scaling identity tolerance";
      }
    } else if (cfg.experiment == "tail") {
      auto res = run_tail(cfg);
      write_tail_samples_csv(res, cfg.tail_n, path("tail_samples.csv"));
      write_tail_fit_csv(res, path("tail_fit.csv"));
      out.outputs = {"tail_samples.csv", "tail_fit.csv"};
      if (plots) {
        PlotSeries fit;
        for (const auto& th : res.thresholds)
          if (th.used_in_fit) {
            fit.x.push_back(std::log(th.x));
            fit.y.push_back(std::log(-std::log(th.p_hat)));
          }
        fit.label = "data";
        write_svg_plot(path("tail.svg"), {fit}, "tail log-log fit", "log x",
                       "log(-log P)", false, false);
        out.outputs.push_back("tail.svg");
      }
    } else if (cfg.experiment == "renorm") {
      auto res = run_renorm(cfg);
      export_constants_csv(res.rows, path("renorm.csv"));
      write_renorm_summary_csv(res, path("renorm_summary.csv"));
      out.outputs = {"renorm.csv", "renorm_summary.csv"};
      if (plots) {
        PlotSeries s;
        for (const auto& r : res.rows) {
          s.x.push_back(std::log(r.eps));
          s.y.push_back(r.total);
        }
        s.label = "C_eps";
        write_svg_plot(path("renorm.svg"), {s}, "constant vs ln eps", "ln eps",
                       "C", false, false);
        out.outputs.push_back("renorm.svg");
      }
    } else if (cfg.experiment == "bump") {
      auto res = run_bump(cfg);
      write_bump_csv(res, path("bump.csv"));
      out.outputs = {"bump.csv"};
      if (!res.sandwich_ok) {
        out.exit_code = 3;
        out.message = "bump: min-max sandwich violated";
      }
    } else { // kernel-check
      auto res = run_kernel_check(cfg);
      write_kernel_check_csv(res, path("kernel_check.csv"));
      const DyadicDecomposition& dec = decomposition_for(cfg.d, std::max(1.0, cfg.a));
      export_kernel_csv(dec, path("kernel_table.csv"));
      out.outputs = {"kernel_check.csv", "kernel_table.csv"};
      if (!res.ok) {
        out.exit_code = 3;
        out.message = "kernel-check: a verification failed";
      }
    }
  } catch (const InsufficientTailMass& e) {
    out.exit_code = 4;
    out.message = e.what();
  } catch (const ConfigError& e) {
    out.exit_code = 2;
    out.message = e.what();
  } catch (const Error& e) {
    out.exit_code = 3;
    out.message = e.what();
  }

  manifest.outputs = out.outputs;
  manifest.partial = out.exit_code == 4;
  write_manifest(manifest, path("manifest.json"));
  out.outputs.push_back("manifest.json");
  return out;
}

} // namespace anderson
