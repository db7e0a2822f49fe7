#ifndef ANDERSON_EXPERIMENTS_HPP
#define ANDERSON_EXPERIMENTS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "anderson/renorm.hpp"
#include "anderson/spectra.hpp"

namespace anderson {

struct ExperimentConfig {
  std::string experiment = "spectrum";
  int d = 1;
  double L = 1.0;
  int N = 256;
  Bc bc = Bc::Dirichlet;
  std::vector<double> eps_schedule; // strictly decreasing, each >= 2h
  double a = 12.0;                  // resolvent / fixed-point shift
  double b = 0.0;
  int replicas = 1;
  std::uint64_t base_seed = 1;
  ConstantsMethod constants_method = ConstantsMethod::ContinuumQuadrature;
  std::string mollifier = "standard_bump";
  int k = 4;                 // eigenpairs per solve
  double residual_tol = 1e-9;
  int threads = 0;           // 0: hardware concurrency
  bool noise_on = true;      // spectrum subcommand
  double scale_L = 2.0;      // scaling experiment
  int tail_n = 1;            // eigenvalue index for the tail fit
  int n_thresholds = 12;
  int wells = 1;             // bump experiment
  double well_depth_c = 1.0;
  bool control_runs = true;  // converge: un-renormalised twins in d >= 2

  double eps() const { return eps_schedule.empty() ? 0.0 : eps_schedule.front(); }
  void validate() const; // throws ConfigError
};

// replica k draws from its own counter stream; reproducible in isolation
std::uint64_t replica_seed(std::uint64_t base_seed, int replica);

// runs fn(0..n-1) on a pool; rethrows the first captured exception
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

// ---------------------------------------------------------------- converge

struct ConvergenceRow {
  int replica = 0;
  int eps_index = 0;
  double eps = 0.0;
  double constant_C = 0.0;
  std::vector<double> eigenvalues;
  double control_lambda1 = 0.0; // without C (d >= 2 and control_runs)
  bool has_control = false;
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows; // replica-major, eps-minor
  // per replica: are successive |lambda_1| differences strictly decreasing
  std::vector<bool> cauchy_monotone;
  double monotone_fraction = 0.0;
  // control drift: slope of mean control lambda_1 against ln(eps)
  double control_slope = 0.0;
  bool has_control = false;
};

ConvergenceResult run_convergence(const ExperimentConfig& cfg);

// ------------------------------------------------------------------ scaling

struct ScalingRow {
  int replica = 0;
  std::vector<double> lambda_unit;   // on (-1,1)^d
  std::vector<double> lambda_tilde;  // coupled rescaled operator on (-L,L)^d
  std::vector<double> lambda_zeta;   // independent zeta construction
  std::vector<double> identity_gap;  // L^-2 l_n - l~_n - (L^-2 C - C~)
  double tolerance = 0.0;            // five stencil-error bounds
  bool identity_ok = false;
};

struct ScalingResult {
  std::vector<ScalingRow> rows;
  double delta_pred = 0.0;    // L^-2 C_eps^(1) - C~_eps^(1)
  double mean_gap_lhs = 0.0;  // mean L^-2 lambda_1 minus mean zeta lambda_1
  double mean_gap_se = 0.0;   // standard error of that difference
  int identity_failures = 0;
};

ScalingResult run_scaling(const ExperimentConfig& cfg);

// --------------------------------------------------------------------- tail

struct TailThreshold {
  double x = 0.0;
  long long exceedances = 0;
  double p_hat = 0.0;
  double cp_low = 0.0, cp_high = 0.0; // Clopper-Pearson 95% interval
  bool used_in_fit = false;
};

struct TailRecord {
  std::vector<double> lambdas; // lambda_{tail_n} per replica
  std::vector<TailThreshold> thresholds;
  double slope = 0.0;      // fit of log(-log P) against log x
  double slope_se = 0.0;
  double ci_low = 0.0, ci_high = 0.0;
  double target = 0.0;     // 2 - d/2
  bool trend_only = false; // d = 3: no numeric gate
  bool monotone_cdf = true;
};

TailRecord run_tail(const ExperimentConfig& cfg);

// --------------------------------------------------------------------- bump

struct BumpResult {
  int wells = 0;
  double c = 0.0;
  double plateau_b = 0.0;      // -3c - |grad f1|^2
  double grad_f1_sq = 0.0;
  std::vector<double> lambdas; // first `wells` eigenvalues of -Delta + h
  double upper = 0.0;          // -3c
  bool sandwich_ok = false;    // b <= lambda_n <= -3c
  double free_lambda1 = 0.0;   // chi = 0 control (positive for Dirichlet)
};

BumpResult run_bump(const ExperimentConfig& cfg);

// ----------------------------------------------------------------- spectrum

struct SpectrumRunResult {
  std::vector<SpectrumResult> replicas;
  double constant_C = 0.0;
};

SpectrumRunResult run_spectrum(const ExperimentConfig& cfg);

// ------------------------------------------------------------------- renorm

struct RenormRunResult {
  std::vector<RenormConstants> rows; // one per eps level
  double slope_vs_log_eps = 0.0;     // d = 2
  double eps_c1_spread = 0.0;        // d = 3: relative spread of eps * c1
  std::optional<McEstimate> mc_cross; // oracle at the smallest eps
};

RenormRunResult run_renorm(const ExperimentConfig& cfg);

// ------------------------------------------------------------- kernel-check

struct KernelCheckResult {
  double telescoping_max_err = 0.0;
  double moment_abs = 0.0;          // oracle moment of one layer
  double boundary_sup = 0.0;        // K(x,.) at x on the boundary
  double symmetry_err = 0.0;
  double truncation_shift = 0.0;    // effect of raising M by 2
  double truncation_bound = 0.0;
  bool ok = false;
};

KernelCheckResult run_kernel_check(const ExperimentConfig& cfg);

} // namespace anderson

#endif
