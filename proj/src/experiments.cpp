#include "anderson/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "anderson/operator.hpp"
#include "anderson/rng.hpp"

namespace anderson {

namespace {

NoiseField zero_field(const Grid& g) {
  NoiseField f;
  f.grid = g;
  f.kind = NoiseKind::Deterministic;
  f.values.assign(static_cast<std::size_t>(g.num_sites()), 0.0);
  return f;
}

double linear_slope(const std::vector<double>& xs, const std::vector<double>& ys,
                    double* se_out = nullptr) {
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  const double slope = (n * sxy - sx * sy) / denom;
  if (se_out) {
    const double intercept = (sy - slope * sx) / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = ys[i] - slope * xs[i] - intercept;
      ss += r * r;
    }
    const double dof = std::max(1.0, n - 2.0);
    *se_out = std::sqrt(ss / dof * n / denom);
  }
  return slope;
}

double constant_for(const ExperimentConfig& cfg, const Grid& grid, double a,
                    double eps) {
  if (cfg.d == 1) return 0.0;
  const auto& prof = MollifierProfile::by_name(cfg.mollifier);
  if (cfg.constants_method == ConstantsMethod::LatticeSelfEnergy) {
    Mollifier mol(cfg.d, eps, prof);
    return lattice_self_energy(grid, a, eps, mol);
  }
  return renorm_constants(cfg.d, a, eps, prof, cfg.constants_method).total;
}

} // namespace

void ExperimentConfig::validate() const {
  Grid grid(d, L, N, bc); // validates d, L, N
  if (replicas < 1) throw ConfigError("config: replicas must be >= 1");
  if (k < 1 || k > 64) throw ConfigError("config: k must be in [1,64]");
  if (eps_schedule.empty() && experiment != "bump" &&
      experiment != "kernel-check" &&
      !(experiment == "spectrum" && !noise_on))
    throw ConfigError("config: eps schedule must not be empty");
  for (std::size_t i = 1; i < eps_schedule.size(); ++i)
    if (!(eps_schedule[i] < eps_schedule[i - 1]))
      throw ConfigError("config: eps schedule must be strictly decreasing");
  if (experiment == "converge" && eps_schedule.size() < 2)
    throw ConfigError("config: converge needs at least 2 eps levels");
  if (experiment == "scaling" && !(scale_L > 1.0))
    throw ConfigError("config: scaling needs scale_L > 1");
  if (experiment == "bump") {
    if (wells < 1) throw ConfigError("config: wells must be >= 1");
    const double spacing = 2.2;
    const double extent = 0.5 * (wells - 1) * spacing + 1.0;
    if (extent >= L)
      throw GeometryError("config: " + std::to_string(wells) +
                          " bump supports do not fit disjointly in (-L,L)^d");
  }
  if (tail_n > k) throw ConfigError("config: tail_n must be <= k");
  if (!(b > -2.0 && b < 2.0)) throw ConfigError("config: b must be in (-2,2)");
}

std::uint64_t replica_seed(std::uint64_t base_seed, int replica) {
  Rng rng(base_seed, 0x5eedull << 32 | static_cast<std::uint32_t>(replica));
  return rng.next_u64();
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 0)
    threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex err_mtx;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mtx);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

ConvergenceResult run_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  Grid grid(cfg.d, cfg.L, cfg.N, cfg.bc);
  const auto& prof = MollifierProfile::by_name(cfg.mollifier);
  const int levels = static_cast<int>(cfg.eps_schedule.size());
  const bool with_control = cfg.control_runs && cfg.d >= 2;

  // constants once per level (shared cache; avoids racing the quadratures)
  std::vector<double> constants(static_cast<std::size_t>(levels));
  for (int j = 0; j < levels; ++j)
    constants[static_cast<std::size_t>(j)] =
        constant_for(cfg, grid, 1.0, cfg.eps_schedule[static_cast<std::size_t>(j)]);

  ConvergenceResult res;
  res.has_control = with_control;
  res.rows.resize(static_cast<std::size_t>(cfg.replicas * levels));
  res.cauchy_monotone.resize(static_cast<std::size_t>(cfg.replicas));

  parallel_for(cfg.replicas, cfg.threads, [&](int r) {
    const std::uint64_t seed = replica_seed(cfg.base_seed, r);
    // coupling discipline: one white field consumed by every eps level
    const NoiseField white = sample_white(grid, seed);
    for (int j = 0; j < levels; ++j) {
      const double eps = cfg.eps_schedule[static_cast<std::size_t>(j)];
      Mollifier mol(cfg.d, eps, prof);
      const NoiseField xi = mollify(white, mol);
      ConvergenceRow row;
      row.replica = r;
      row.eps_index = j;
      row.eps = eps;
      row.constant_C = constants[static_cast<std::size_t>(j)];
      auto H = assemble(grid, xi, row.constant_C);
      auto spec = lowest_eigenpairs(H, cfg.k, cfg.residual_tol, seed);
      row.eigenvalues = spec.eigenvalues;
      if (with_control) {
        auto H0 = assemble(grid, xi, 0.0);
        auto ctrl = lowest_eigenpairs(H0, 1, cfg.residual_tol, seed);
        row.control_lambda1 = ctrl.eigenvalues[0];
        row.has_control = true;
      }
      res.rows[static_cast<std::size_t>(r * levels + j)] = std::move(row);
    }
    // Cauchy trend on lambda_1
    bool monotone = true;
    double prev_diff = -1.0;
    for (int j = 1; j < levels; ++j) {
      const double diff =
          std::abs(res.rows[static_cast<std::size_t>(r * levels + j)].eigenvalues[0] -
                   res.rows[static_cast<std::size_t>(r * levels + j - 1)].eigenvalues[0]);
      if (prev_diff >= 0.0 && diff >= prev_diff) monotone = false;
      prev_diff = diff;
    }
    res.cauchy_monotone[static_cast<std::size_t>(r)] = monotone;
  });

  int mono = 0;
  for (bool m : res.cauchy_monotone) mono += m ? 1 : 0;
  res.monotone_fraction = static_cast<double>(mono) / cfg.replicas;

  if (with_control) {
    std::vector<double> lns, means;
    for (int j = 0; j < levels; ++j) {
      double mean = 0.0;
      for (int r = 0; r < cfg.replicas; ++r)
        mean += res.rows[static_cast<std::size_t>(r * levels + j)].control_lambda1;
      means.push_back(mean / cfg.replicas);
      lns.push_back(std::log(cfg.eps_schedule[static_cast<std::size_t>(j)]));
    }
    res.control_slope = linear_slope(lns, means);
  }
  return res;
}

ScalingResult run_scaling(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.L != 1.0)
    throw ConfigError("scaling: the base lattice must live on (-1,1)^d");
  const double L = cfg.scale_L;
  Grid unit(cfg.d, 1.0, cfg.N, cfg.bc);
  Grid big(cfg.d, L, cfg.N, cfg.bc);
  const auto& prof = MollifierProfile::by_name(cfg.mollifier);
  const double eps = cfg.eps();

  const auto base = renorm_constants(cfg.d, 1.0, eps, prof,
                                     cfg.constants_method ==
                                             ConstantsMethod::MonteCarloOracle
                                         ? ConstantsMethod::ContinuumQuadrature
                                         : ConstantsMethod::ContinuumQuadrature);
  const auto scaled = scaled_constants(base, L);
  const double c_unit = cfg.d == 1 ? 0.0 : base.total;
  const double c_tilde = cfg.d == 1 ? 0.0 : scaled.total_tilde;

  ScalingResult res;
  res.delta_pred = c_unit / (L * L) - c_tilde;
  res.rows.resize(static_cast<std::size_t>(cfg.replicas));

  parallel_for(cfg.replicas, cfg.threads, [&](int r) {
    const std::uint64_t seed = replica_seed(cfg.base_seed, r);
    ScalingRow row;
    row.replica = r;
    const NoiseField white = sample_white(unit, seed);
    Mollifier mol(cfg.d, eps, prof);
    const NoiseField xi = mollify(white, mol);

    auto Hu = assemble(unit, xi, c_unit);
    auto su = lowest_eigenpairs(Hu, cfg.k, cfg.residual_tol, seed);
    row.lambda_unit = su.eigenvalues;

    // exact per-realisation coupling through rescale_noise
    const NoiseField xi_tilde = rescale_noise(xi, L);
    auto Ht = assemble(big, xi_tilde, c_tilde);
    auto st = lowest_eigenpairs(Ht, cfg.k, cfg.residual_tol, seed);
    row.lambda_tilde = st.eigenvalues;

    // independent zeta construction: L^{d/2-2} zeta_{eps L} on (-L,L)^d
    const NoiseField zeta = sample_white(big, replica_seed(cfg.base_seed + 0x5a,
                                                           r));
    Mollifier mol_big(cfg.d, eps * L, prof);
    NoiseField zeta_eps = mollify(zeta, mol_big);
    const double amp = std::pow(L, 0.5 * cfg.d - 2.0);
    for (double& v : zeta_eps.values) v *= amp;
    auto Hz = assemble(big, zeta_eps, c_tilde);
    auto sz = lowest_eigenpairs(Hz, cfg.k, cfg.residual_tol, seed);
    row.lambda_zeta = sz.eigenvalues;

    const double sup_pot = xi.max_abs() + std::abs(c_unit);
    row.identity_gap.resize(static_cast<std::size_t>(cfg.k));
    row.identity_ok = true;
    for (int n = 0; n < cfg.k; ++n) {
      const double lhs = row.lambda_unit[static_cast<std::size_t>(n)] / (L * L);
      const double rhs = row.lambda_tilde[static_cast<std::size_t>(n)];
      row.identity_gap[static_cast<std::size_t>(n)] = lhs - rhs - res.delta_pred;
      // five stencil-error bounds; the coupled identity is lattice-exact so
      // this dominates the solver residuals comfortably
      const double bound =
          5.0 * unit.h() * unit.h() *
          (std::abs(row.lambda_unit[static_cast<std::size_t>(n)]) + sup_pot);
      row.tolerance = bound;
      if (std::abs(row.identity_gap[static_cast<std::size_t>(n)]) > bound)
        row.identity_ok = false;
    }
    res.rows[static_cast<std::size_t>(r)] = std::move(row);
  });

  double mean_lhs = 0.0, mean_zeta = 0.0;
  std::vector<double> diffs;
  for (const auto& row : res.rows) {
    mean_lhs += row.lambda_unit[0] / (L * L);
    mean_zeta += row.lambda_zeta[0];
    res.identity_failures += row.identity_ok ? 0 : 1;
  }
  mean_lhs /= cfg.replicas;
  mean_zeta /= cfg.replicas;
  res.mean_gap_lhs = mean_lhs - mean_zeta;
  double var = 0.0;
  for (const auto& row : res.rows) {
    const double v = row.lambda_unit[0] / (L * L) - row.lambda_zeta[0];
    var += (v - res.mean_gap_lhs) * (v - res.mean_gap_lhs);
  }
  res.mean_gap_se = cfg.replicas > 1
                        ? std::sqrt(var / (cfg.replicas - 1.0) / cfg.replicas)
                        : 0.0;
  return res;
}

namespace {

// Clopper-Pearson 95% interval via the beta quantile (bisection on the
// regularized incomplete beta function)
double beta_cdf(double x, double a, double b) {
  // continued fraction for the regularized incomplete beta (Lentz)
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  auto betacf = [](double a, double b, double x) {
    const int maxit = 200;
    const double eps = 3e-14, fpmin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= maxit; ++m) {
      const int m2 = 2 * m;
      double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
      d = 1.0 + aa * d;
      if (std::abs(d) < fpmin) d = fpmin;
      c = 1.0 + aa / c;
      if (std::abs(c) < fpmin) c = fpmin;
      d = 1.0 / d;
      h *= d * c;
      aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
      d = 1.0 + aa * d;
      if (std::abs(d) < fpmin) d = fpmin;
      c = 1.0 + aa / c;
      if (std::abs(c) < fpmin) c = fpmin;
      d = 1.0 / d;
      const double del = d * c;
      h *= del;
      if (std::abs(del - 1.0) < eps) break;
    }
    return h;
  };
  const double ln_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  const double front = std::exp(a * std::log(x) + b * std::log(1.0 - x) - ln_beta);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - std::exp(b * std::log(1.0 - x) + a * std::log(x) - ln_beta) *
                   betacf(b, a, 1.0 - x) / b;
}

double beta_quantile(double p, double a, double b) {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (beta_cdf(mid, a, b) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace

TailRecord run_tail(const ExperimentConfig& cfg) {
  cfg.validate();
  Grid grid(cfg.d, cfg.L, cfg.N, cfg.bc);
  const auto& prof = MollifierProfile::by_name(cfg.mollifier);
  const double eps = cfg.eps();
  const double C = constant_for(cfg, grid, 1.0, eps);

  TailRecord rec;
  rec.target = 2.0 - 0.5 * cfg.d;
  rec.trend_only = cfg.d == 3;
  rec.lambdas.resize(static_cast<std::size_t>(cfg.replicas));

  parallel_for(cfg.replicas, cfg.threads, [&](int r) {
    const std::uint64_t seed = replica_seed(cfg.base_seed, r);
    const NoiseField white = sample_white(grid, seed);
    Mollifier mol(cfg.d, eps, prof);
    const NoiseField xi = mollify(white, mol);
    auto H = assemble(grid, xi, C);
    auto spec = lowest_eigenpairs(H, cfg.tail_n, cfg.residual_tol, seed);
    rec.lambdas[static_cast<std::size_t>(r)] =
        spec.eigenvalues[static_cast<std::size_t>(cfg.tail_n - 1)];
  });

  // thresholds on -lambda: need at least 30 exceedances at the deepest one
  std::vector<double> neg(rec.lambdas.size());
  for (std::size_t i = 0; i < rec.lambdas.size(); ++i) neg[i] = -rec.lambdas[i];
  std::sort(neg.begin(), neg.end(), std::greater<double>());
  const long long m30 = 30;
  if (static_cast<long long>(neg.size()) < m30 || neg[static_cast<std::size_t>(m30 - 1)] <= 0.0)
    throw InsufficientTailMass(
        "tail: fewer than 30 exceedances at any positive threshold");
  const double x_hi = neg[static_cast<std::size_t>(m30 - 1)];
  // shallow end: median exceedance level (P about 1/2), kept positive
  const std::size_t half = neg.size() / 2;
  double x_lo = std::max(1e-9, neg[half]);
  if (x_lo >= x_hi) x_lo = 0.5 * x_hi;

  const long long total = static_cast<long long>(neg.size());
  std::vector<double> log_x, log_neg_log_p;
  for (int j = 0; j < cfg.n_thresholds; ++j) {
    TailThreshold th;
    th.x = x_lo * std::pow(x_hi / x_lo,
                           static_cast<double>(j) / (cfg.n_thresholds - 1));
    th.exceedances = static_cast<long long>(
        std::lower_bound(neg.begin(), neg.end(), th.x, std::greater<double>()) -
        neg.begin());
    th.p_hat = static_cast<double>(th.exceedances) / static_cast<double>(total);
    const double n = static_cast<double>(total);
    const double kk = static_cast<double>(th.exceedances);
    th.cp_low = th.exceedances == 0
                    ? 0.0
                    : beta_quantile(0.025, kk, n - kk + 1.0);
    th.cp_high = th.exceedances == total
                     ? 1.0
                     : beta_quantile(0.975, kk + 1.0, n - kk);
    th.used_in_fit = th.exceedances >= m30 && th.p_hat < 1.0 && th.p_hat > 0.0;
    if (th.used_in_fit) {
      log_x.push_back(std::log(th.x));
      log_neg_log_p.push_back(std::log(-std::log(th.p_hat)));
    }
    rec.thresholds.push_back(th);
  }
  for (std::size_t j = 1; j < rec.thresholds.size(); ++j)
    if (rec.thresholds[j].p_hat > rec.thresholds[j - 1].p_hat)
      rec.monotone_cdf = false;
  if (log_x.size() >= 3) {
    rec.slope = linear_slope(log_x, log_neg_log_p, &rec.slope_se);
    rec.ci_low = rec.slope - 1.96 * rec.slope_se;
    rec.ci_high = rec.slope + 1.96 * rec.slope_se;
  }
  return rec;
}

BumpResult run_bump(const ExperimentConfig& cfg) {
  cfg.validate();
  Grid grid(cfg.d, cfg.L, cfg.N, Bc::Dirichlet);
  BumpResult res;
  res.wells = cfg.wells;
  res.c = cfg.well_depth_c;
  res.upper = -3.0 * cfg.well_depth_c;

  // f1: normalized smooth bump supported in B(0,1/2)
  auto f_shape = [](double r) {
    const double u = 2.0 * r;
    return u < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0;
  };
  const double f_l2 = std::sqrt(radial_integral(
      cfg.d, [&](double r) { return f_shape(r) * f_shape(r); }, 0.5, 8192));
  // |grad f1|^2 by central differences of the radial profile
  const double fd = 1e-6;
  res.grad_f1_sq = radial_integral(
                       cfg.d,
                       [&](double r) {
                         const double g =
                             (f_shape(r + fd) - f_shape(std::abs(r - fd))) /
                             (2.0 * fd);
                         return g * g;
                       },
                       0.5, 8192) /
                   (f_l2 * f_l2);
  res.plateau_b = -3.0 * cfg.well_depth_c - res.grad_f1_sq;

  // h = sum of plateau wells chi_k, depth b on B(center,1/2), 0 outside B(center,1)
  const double spacing = 2.2;
  std::vector<double> centers(static_cast<std::size_t>(cfg.wells));
  for (int i = 0; i < cfg.wells; ++i)
    centers[static_cast<std::size_t>(i)] = (i - 0.5 * (cfg.wells - 1)) * spacing;
  for (double c0 : centers)
    if (std::abs(c0) + 1.0 >= cfg.L)
      throw GeometryError("bump: well supports leave the box");
  const double b = res.plateau_b;
  auto h_field = make_deterministic(grid, [&](const double* x) {
    double v = 0.0;
    for (double c0 : centers) {
      double r2 = (x[0] - c0) * (x[0] - c0);
      for (int ax = 1; ax < cfg.d; ++ax) r2 += x[ax] * x[ax];
      v += b * omega_cut(std::sqrt(r2));
    }
    return v;
  });
  auto H = assemble(grid, h_field, 0.0);
  auto spec = lowest_eigenpairs(H, cfg.wells, cfg.residual_tol, cfg.base_seed);
  res.lambdas = spec.eigenvalues;
  res.sandwich_ok = true;
  for (double l : res.lambdas)
    if (l < b - 1e-9 || l > res.upper) res.sandwich_ok = false;

  auto Hfree = assemble(grid, zero_field(grid), 0.0);
  auto free_spec = lowest_eigenpairs(Hfree, 1, cfg.residual_tol, cfg.base_seed);
  res.free_lambda1 = free_spec.eigenvalues[0];
  return res;
}

SpectrumRunResult run_spectrum(const ExperimentConfig& cfg) {
  cfg.validate();
  Grid grid(cfg.d, cfg.L, cfg.N, cfg.bc);
  const auto& prof = MollifierProfile::by_name(cfg.mollifier);
  SpectrumRunResult res;
  res.replicas.resize(static_cast<std::size_t>(cfg.replicas));
  const double eps = cfg.eps();
  res.constant_C = cfg.noise_on ? constant_for(cfg, grid, 1.0, eps) : 0.0;
  parallel_for(cfg.replicas, cfg.threads, [&](int r) {
    const std::uint64_t seed = replica_seed(cfg.base_seed, r);
    NoiseField pot;
    if (cfg.noise_on) {
      Mollifier mol(cfg.d, eps, prof);
      pot = mollify(sample_white(grid, seed), mol);
    } else {
      pot = zero_field(grid);
    }
    auto H = assemble(grid, pot, cfg.noise_on ? res.constant_C : 0.0);
    res.replicas[static_cast<std::size_t>(r)] =
        lowest_eigenpairs(H, cfg.k, cfg.residual_tol, seed);
  });
  return res;
}

RenormRunResult run_renorm(const ExperimentConfig& cfg) {
  if (cfg.eps_schedule.empty())
    throw ConfigError("renorm: eps schedule must not be empty");
  const auto& prof = MollifierProfile::by_name(cfg.mollifier);
  RenormRunResult res;
  for (double eps : cfg.eps_schedule)
    res.rows.push_back(renorm_constants(cfg.d, cfg.a, eps, prof,
                                        cfg.constants_method));
  if (cfg.d == 2 && res.rows.size() >= 2) {
    std::vector<double> lns, c1s;
    for (const auto& r : res.rows) {
      lns.push_back(std::log(r.eps));
      c1s.push_back(r.c1);
    }
    res.slope_vs_log_eps = linear_slope(lns, c1s);
  }
  if (cfg.d == 3) {
    double lo = 1e300, hi = -1e300;
    for (const auto& r : res.rows) {
      const double v = r.eps * r.c1;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    res.eps_c1_spread = (hi - lo) / std::max(1e-300, std::abs(hi));
  }
  if (cfg.d >= 2) {
    const double eps = cfg.eps_schedule.back();
    res.mc_cross = mc_c1(cfg.d, cfg.a, eps, prof, 2000000,
                         replica_seed(cfg.base_seed, 1 << 20));
  }
  return res;
}

KernelCheckResult run_kernel_check(const ExperimentConfig& cfg) {
  GreensKernel kernel(cfg.d, cfg.a >= 1.0 ? cfg.a : 1.0);
  const DyadicDecomposition& dec = decomposition_for(cfg.d, kernel.a());
  KernelCheckResult res;
  Rng rng(cfg.base_seed, 0x6b63u);
  for (int i = 0; i < 100; ++i) {
    const double rr =
        std::ldexp(0.3 + 0.65 * rng.next_double(), -(i % 10)) / kernel.sqrt_a();
    double sum = dec.remainder_radial(rr);
    for (int n = dec.n_a(); n <= dec.max_level(); ++n) {
      if (std::ldexp(1.0, -n) < rr) break;
      sum += dec.layer_radial(n, rr);
    }
    res.telescoping_max_err =
        std::max(res.telescoping_max_err, std::abs(sum - kernel.eval_radial(rr)));
  }
  // moment of one layer by a dense radial Simpson oracle
  {
    const int n = dec.n_a() + 1;
    const double top = std::ldexp(1.0, -n);
    double acc = 0.0;
    const int panels = 40000;
    for (int i = 0; i < panels; ++i) {
      const double a0 = top * i / panels, b0 = top * (i + 1) / panels;
      auto f = [&](double r) {
        return std::pow(r, cfg.d - 1) * dec.layer_radial(n, r);
      };
      acc += (f(a0) + 4.0 * f(0.5 * (a0 + b0)) + f(b0)) * (b0 - a0) / 6.0;
    }
    res.moment_abs = std::abs(sphere_area(cfg.d) * acc);
  }
  ReflectedKernel refl(kernel, cfg.L, cfg.bc);
  if (cfg.bc == Bc::Dirichlet) {
    double xb[3] = {cfg.L, 0.0, 0.0};
    double y[3] = {0.31 * cfg.L, -0.12 * cfg.L, 0.05 * cfg.L};
    res.boundary_sup = std::abs(refl.eval(xb, y));
    double x[3] = {0.4 * cfg.L, 0.1 * cfg.L, -0.2 * cfg.L};
    res.symmetry_err = std::abs(refl.eval(x, y) - refl.eval(y, x));
    ReflectedKernel more(kernel, cfg.L, cfg.bc, refl.truncation() + 2);
    res.truncation_shift = std::abs(more.eval(x, y) - refl.eval(x, y));
    res.truncation_bound = refl.tail_bound();
  }
  res.ok = res.telescoping_max_err < 1e-8 &&
           res.moment_abs < 1e-8 &&
           (cfg.bc != Bc::Dirichlet ||
            (res.boundary_sup < 1e-10 + 10.0 * refl.tail_bound() &&
             res.truncation_shift <= res.truncation_bound + 1e-15));
  return res;
}

} // namespace anderson
