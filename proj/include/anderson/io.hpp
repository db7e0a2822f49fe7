#ifndef ANDERSON_IO_HPP
#define ANDERSON_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "anderson/experiments.hpp"

namespace anderson {

const char* code_version();

std::uint64_t fnv1a64(const std::string& data);

struct Manifest {
  std::string experiment;
  std::string config_json;   // canonical config (determines every output)
  std::string timestamp;     // informative only; excluded from comparisons
  std::vector<std::uint64_t> replica_seeds;
  std::vector<std::string> outputs;
  bool partial = false;
};

void write_manifest(const Manifest& m, const std::string& path);

// every CSV starts with "# anderson-csv v1 <schema>"
void write_spectrum_run_csv(const SpectrumRunResult& res,
                            const std::string& path);
void write_convergence_csv(const ConvergenceResult& res,
                           const ExperimentConfig& cfg, const std::string& path);
void write_scaling_csv(const ScalingResult& res, const std::string& path);
void write_tail_samples_csv(const TailRecord& rec, int tail_n,
                            const std::string& path);
void write_tail_fit_csv(const TailRecord& rec, const std::string& path);
void write_bump_csv(const BumpResult& res, const std::string& path);
void write_kernel_check_csv(const KernelCheckResult& res,
                            const std::string& path);
void write_renorm_summary_csv(const RenormRunResult& res,
                              const std::string& path);

struct PlotSeries {
  std::vector<double> x, y;
  std::string label;
};

// minimal static SVG line plot
void write_svg_plot(const std::string& path, const std::vector<PlotSeries>& xs,
                    const std::string& title, const std::string& xlabel,
                    const std::string& ylabel, bool log_x = false,
                    bool log_y = false);

} // namespace anderson

#endif
