#include "anderson.h"

#include <cstring>
#include <string>

#include "anderson/config.hpp"
#include "anderson/io.hpp"
#include "anderson/operator.hpp"
#include "anderson/renorm.hpp"
#include "anderson/runner.hpp"
#include "anderson/spectra.hpp"

using namespace anderson;

namespace {

thread_local std::string g_last_error;

anderson_status set_error(anderson_status code, const char* what) {
  g_last_error = what ? what : "";
  return code;
}

// map the C++ error taxonomy onto status codes
anderson_status translate() {
  try {
    throw;
  } catch (const UnresolvedMollifier& e) {
    return set_error(ANDERSON_EUNRESOLVED, e.what());
  } catch (const GridMismatch& e) {
    return set_error(ANDERSON_EGRID, e.what());
  } catch (const SingularPoint& e) {
    return set_error(ANDERSON_ESINGULAR, e.what());
  } catch (const QuadratureFailure& e) {
    return set_error(ANDERSON_EQUADRATURE, e.what());
  } catch (const NotPositiveDefinite& e) {
    return set_error(ANDERSON_ENOTPOSDEF, e.what());
  } catch (const MaxIterations& e) {
    return set_error(ANDERSON_EMAXITER, e.what());
  } catch (const Diverged& e) {
    return set_error(ANDERSON_EDIVERGED, e.what());
  } catch (const NoConvergence& e) {
    return set_error(ANDERSON_ENOCONV, e.what());
  } catch (const GeometryError& e) {
    return set_error(ANDERSON_EGEOMETRY, e.what());
  } catch (const InsufficientTailMass& e) {
    return set_error(ANDERSON_ETAILMASS, e.what());
  } catch (const ConfigError& e) {
    return set_error(ANDERSON_ECONFIG, e.what());
  } catch (const Error& e) {
    return set_error(ANDERSON_ENUMERIC, e.what());
  } catch (const std::exception& e) {
    return set_error(ANDERSON_ENUMERIC, e.what());
  } catch (...) {
    return set_error(ANDERSON_ENUMERIC, "unknown error");
  }
}

} // namespace

struct anderson_grid {
  Grid grid;
};
struct anderson_field {
  NoiseField field;
};
struct anderson_greens {
  GreensKernel kernel;
  const DyadicDecomposition* dec; // shared, cached per (d, a)
};
struct anderson_operator {
  Hamiltonian H;
};
struct anderson_spectrum {
  SpectrumResult s;
};

extern "C" {

const char* anderson_version(void) { return code_version(); }

const char* anderson_last_error(void) { return g_last_error.c_str(); }

anderson_status anderson_grid_create(int d, double half_width_L, int N, int bc,
                                     anderson_grid** out) {
  if (!out) return set_error(ANDERSON_EINVAL, "grid_create: out is null");
  try {
    *out = new anderson_grid{
        Grid(d, half_width_L, N,
             bc == ANDERSON_BC_PERIODIC ? Bc::Periodic : Bc::Dirichlet)};
    return ANDERSON_OK;
  } catch (...) {
    return translate();
  }
}

void anderson_grid_free(anderson_grid* grid) { delete grid; }

int64_t anderson_grid_sites(const anderson_grid* grid) {
  return grid ? grid->grid.num_sites() : 0;
}

double anderson_grid_mesh(const anderson_grid* grid) {
  return grid ? grid->grid.h() : 0.0;
}

anderson_status anderson_sample_white(const anderson_grid* grid, uint64_t seed,
                                      anderson_field** out) {
  if (!grid || !out) return set_error(ANDERSON_EINVAL, "sample_white: null argument");
  try {
    *out = new anderson_field{sample_white(grid->grid, seed)};
    return ANDERSON_OK;
  } catch (...) {
    return translate();
  }
}

anderson_status anderson_mollify(const anderson_field* field, double eps,
                                 const char* mollifier_profile,
                                 anderson_field** out) {
  if (!field || !out) return set_error(ANDERSON_EINVAL, "mollify: null argument");
  try {
    const auto& prof = MollifierProfile::by_name(
        mollifier_profile ? mollifier_profile : "standard_bump");
    Mollifier mol(field->field.grid.d, eps, prof);
    *out = new anderson_field{mollify(field->field, mol)};
    return ANDERSON_OK;
  } catch (...) {
    return translate();
  }
}

anderson_status anderson_rescale_noise(const anderson_field* field, double L,
                                       anderson_field** out) {
  if (!field || !out) return set_error(ANDERSON_EINVAL, "rescale: null argument");
  try {
    *out = new anderson_field{rescale_noise(field->field, L)};
    return ANDERSON_OK;
  } catch (...) {
    return translate();
  }
}

void anderson_field_free(anderson_field* field) { delete field; }

int64_t anderson_field_size(const anderson_field* field) {
  return field ? static_cast<int64_t>(field->field.values.size()) : 0;
}

anderson_status anderson_field_values(const anderson_field* field,
                                      double* buffer, int64_t capacity) {
  if (!field || !buffer) return set_error(ANDERSON_EINVAL, "field_values: null argument");
  if (capacity < static_cast<int64_t>(field->field.values.size()))
    return set_error(ANDERSON_EINVAL, "field_values: buffer too small");
  std::memcpy(buffer, field->field.values.data(),
              field->field.values.size() * sizeof(double));
  return ANDERSON_OK;
}

anderson_status anderson_field_export_csv(const anderson_field* field,
                                          const char* path) {
  if (!field || !path) return set_error(ANDERSON_EINVAL, "export_csv: null argument");
  try {
    export_field_csv(field->field, path);
    return ANDERSON_OK;
  } catch (...) {
    return translate();
  }
}

anderson_status anderson_field_export_binary(const anderson_field* field,
                                             const char* path) {
  if (!field || !path) return set_error(ANDERSON_EINVAL, "export_binary: null argument");
  try {
    export_field_binary(field->field, path);
    return ANDERSON_OK;
  } catch (...) {
    return translate();
  }
}

anderson_status anderson_greens_create(int d, double a, anderson_greens** out) {
  if (!out) return set_error(ANDERSON_EINVAL, "greens_create: out is null");
  try {
    *out = new anderson_greens{GreensKernel(d, a), &decomposition_for(d, a)};
    return ANDERSON_OK;
  } catch (...) {
    return translate();
  }
}

void anderson_greens_free(anderson_greens* g) { delete g; }

int anderson_greens_cutoff_index(const anderson_greens* g) {
  return g ? g->kernel.cutoff_index() : -1;
}

anderson_status anderson_greens_eval(const anderson_greens* g, double r,
                                     double* out) {
  if (!g || !out) return set_error(ANDERSON_EINVAL, "greens_eval: null argument");
  try {
    *out = g->kernel.eval_radial(r);
    return ANDERSON_OK;
  } catch (...) {
    return translate();
  }
}

anderson_status anderson_greens_layer(const anderson_greens* g, int n, double r,
                                      double* out) {
  if (!g || !out) return set_error(ANDERSON_EINVAL, "greens_layer: null argument");
  try {
    *out = g->dec->layer_radial(n, r);
    return ANDERSON_OK;
  } catch (...) {
    return translate();
  }
}

anderson_status anderson_greens_remainder(const anderson_greens* g, double r,
                                          double* out) {
  if (!g || !out) return set_error(ANDERSON_EINVAL, "greens_remainder: null argument");
  try {
    *out = g->dec->remainder_radial(r);
    return ANDERSON_OK;
  } catch (...) {
    return translate();
  }
}

anderson_status anderson_greens_eval_reflected(const anderson_greens* g,
                                               double L, int bc,
                                               const double* x, const double* y,
                                               double* out,
                                               double* tail_bound) {
  if (!g || !x || !y || !out)
    return set_error(ANDERSON_EINVAL, "eval_reflected: null argument");
  try {
    ReflectedKernel refl(g->kernel, L,
                         bc == ANDERSON_BC_PERIODIC ? Bc::Periodic
                                                    : Bc::Dirichlet);
    *out = refl.eval(x, y);
    if (tail_bound) *tail_bound = refl.tail_bound();
    return ANDERSON_OK;
  } catch (...) {
    return translate();
  }
}

anderson_status anderson_renorm_total(int d, double a, double eps,
                                      const char* mollifier_profile,
                                      int method, const anderson_grid* grid,
                                      double* total, double* error_estimate) {
  if (!total) return set_error(ANDERSON_EINVAL, "renorm_total: total is null");
  try {
    const auto& prof = MollifierProfile::by_name(
        mollifier_profile ? mollifier_profile : "standard_bump");
    const ConstantsMethod m =
        method == 1 ? ConstantsMethod::LatticeSelfEnergy
                    : (method == 2 ? ConstantsMethod::MonteCarloOracle
                                   : ConstantsMethod::ContinuumQuadrature);
    const auto rc =
        renorm_constants(d, a, eps, prof, m, grid ? &grid->grid : nullptr);
    *total = rc.total;
    if (error_estimate) *error_estimate = rc.error_estimate;
    return ANDERSON_OK;
  } catch (...) {
    return translate();
  }
}

anderson_status anderson_renorm_parts(int d, double a, double eps,
                                      const char* mollifier_profile,
                                      double* c1, double* c11, double* c12) {
  try {
    const auto& prof = MollifierProfile::by_name(
        mollifier_profile ? mollifier_profile : "standard_bump");
    const auto rc = renorm_constants(d, a, eps, prof);
    if (c1) *c1 = rc.c1;
    if (c11) *c11 = rc.c11;
    if (c12) *c12 = rc.c12;
    return ANDERSON_OK;
  } catch (...) {
    return translate();
  }
}

anderson_status anderson_renorm_scaled(int d, double eps,
                                       const char* mollifier_profile, double L,
                                       double* total_tilde, double* delta_L) {
  try {
    const auto& prof = MollifierProfile::by_name(
        mollifier_profile ? mollifier_profile : "standard_bump");
    const auto base = renorm_constants(d, 1.0, eps, prof);
    const auto sc = scaled_constants(base, L);
    if (total_tilde) *total_tilde = sc.total_tilde;
    if (delta_L) *delta_L = sc.delta_L;
    return ANDERSON_OK;
  } catch (...) {
    return translate();
  }
}

anderson_status anderson_assemble(const anderson_grid* grid,
                                  const anderson_field* potential, double C,
                                  anderson_operator** out) {
  if (!grid || !potential || !out)
    return set_error(ANDERSON_EINVAL, "assemble: null argument");
  try {
    *out = new anderson_operator{assemble(grid->grid, potential->field, C)};
    return ANDERSON_OK;
  } catch (...) {
    return translate();
  }
}

void anderson_operator_free(anderson_operator* op) { delete op; }

anderson_status anderson_operator_export_triplets(const anderson_operator* op,
                                                  const char* path) {
  if (!op || !path) return set_error(ANDERSON_EINVAL, "export_triplets: null argument");
  try {
    export_matrix_triplets(op->H, path);
    return ANDERSON_OK;
  } catch (...) {
    return translate();
  }
}

anderson_status anderson_resolvent_apply(const anderson_operator* op, double a,
                                         const double* g, double* f,
                                         int64_t size, double tol,
                                         int max_iter) {
  if (!op || !g || !f) return set_error(ANDERSON_EINVAL, "resolvent: null argument");
  if (size != op->H.matrix.rows())
    return set_error(ANDERSON_EINVAL, "resolvent: size mismatch");
  try {
    SolverOptions opts;
    if (tol > 0) opts.tol = tol;
    if (max_iter > 0) opts.max_iter = max_iter;
    ResolventHandle handle(op->H, a, opts);
    Eigen::Map<const Eigen::VectorXd> gv(g, size);
    Eigen::VectorXd fv = handle.apply(gv);
    Eigen::Map<Eigen::VectorXd>(f, size) = fv;
    return ANDERSON_OK;
  } catch (...) {
    return translate();
  }
}

anderson_status anderson_fixed_point(const anderson_grid* grid,
                                     const anderson_field* noise, double C,
                                     double a, double b, const double* g,
                                     double* f, int64_t size, double tol,
                                     int* iterations, double* last_ratio) {
  if (!grid || !noise || !g || !f)
    return set_error(ANDERSON_EINVAL, "fixed_point: null argument");
  if (size != grid->grid.num_sites())
    return set_error(ANDERSON_EINVAL, "fixed_point: size mismatch");
  try {
    SolverOptions opts;
    if (tol > 0) opts.tol = tol;
    Eigen::Map<const Eigen::VectorXd> gv(g, size);
    auto res = fixed_point_resolvent(grid->grid, noise->field, C, a, b, gv, opts);
    Eigen::Map<Eigen::VectorXd>(f, size) = res.f;
    if (iterations) *iterations = res.trace.iterations;
    if (last_ratio)
      *last_ratio = res.trace.contraction_ratios.empty()
                        ? 0.0
                        : res.trace.contraction_ratios.back();
    if (!res.trace.converged)
      return set_error(ANDERSON_EDIVERGED,
                       "fixed point stopped contracting: a below the "
                       "admissibility threshold of this realization");
    return ANDERSON_OK;
  } catch (...) {
    return translate();
  }
}

anderson_status anderson_lowest_eigenpairs(const anderson_operator* op, int k,
                                           double residual_tol, uint64_t seed,
                                           anderson_spectrum** out) {
  if (!op || !out) return set_error(ANDERSON_EINVAL, "eigenpairs: null argument");
  try {
    *out = new anderson_spectrum{
        lowest_eigenpairs(op->H, k, residual_tol > 0 ? residual_tol : 1e-9,
                          seed)};
    return (*out)->s.converged
               ? ANDERSON_OK
               : set_error(ANDERSON_ENOCONV,
                           "eigensolver returned a partial result");
  } catch (...) {
    return translate();
  }
}

void anderson_spectrum_free(anderson_spectrum* s) { delete s; }

int anderson_spectrum_count(const anderson_spectrum* s) {
  return s ? static_cast<int>(s->s.eigenvalues.size()) : 0;
}

double anderson_spectrum_eigenvalue(const anderson_spectrum* s, int i) {
  return s && i >= 0 && i < static_cast<int>(s->s.eigenvalues.size())
             ? s->s.eigenvalues[static_cast<std::size_t>(i)]
             : 0.0;
}

double anderson_spectrum_residual(const anderson_spectrum* s, int i) {
  return s && i >= 0 && i < static_cast<int>(s->s.residuals.size())
             ? s->s.residuals[static_cast<std::size_t>(i)]
             : 0.0;
}

int anderson_spectrum_converged(const anderson_spectrum* s) {
  return s && s->s.converged ? 1 : 0;
}

anderson_status anderson_spectrum_eigenvector(const anderson_spectrum* s, int i,
                                              double* buffer,
                                              int64_t capacity) {
  if (!s || !buffer) return set_error(ANDERSON_EINVAL, "eigenvector: null argument");
  if (i < 0 || i >= s->s.eigenvectors.cols())
    return set_error(ANDERSON_EINVAL, "eigenvector: index out of range");
  if (capacity < s->s.eigenvectors.rows())
    return set_error(ANDERSON_EINVAL, "eigenvector: buffer too small");
  Eigen::Map<Eigen::VectorXd>(buffer, s->s.eigenvectors.rows()) =
      s->s.eigenvectors.col(i);
  return ANDERSON_OK;
}

anderson_status anderson_run_json(const char* subcommand,
                                  const char* config_json, const char* out_dir,
                                  int plots) {
  if (!subcommand || !config_json || !out_dir)
    return set_error(ANDERSON_EINVAL, "run_json: null argument");
  try {
    const nlohmann::json j = nlohmann::json::parse(config_json);
    const RunOutcome out = run_experiment(subcommand, j, out_dir, plots != 0);
    if (out.exit_code == 0) return ANDERSON_OK;
    set_error(out.exit_code == 2
                  ? ANDERSON_ECONFIG
                  : (out.exit_code == 4 ? ANDERSON_EPARTIAL : ANDERSON_ENUMERIC),
              out.message.c_str());
    return out.exit_code == 2
               ? ANDERSON_ECONFIG
               : (out.exit_code == 4 ? ANDERSON_EPARTIAL : ANDERSON_ENUMERIC);
  } catch (const nlohmann::json::exception& e) {
    return set_error(ANDERSON_ECONFIG, e.what());
  } catch (...) {
    return translate();
  }
}

anderson_status anderson_validate_config(const char* config_json, char* report,
                                         size_t capacity) {
  if (!config_json) return set_error(ANDERSON_EINVAL, "validate: null argument");
  try {
    const nlohmann::json j = nlohmann::json::parse(config_json);
    const ValidationReport rep = validate_config_json(j);
    std::string text;
    for (const auto& e : rep.errors) text += "error: " + e + "\n";
    for (const auto& w : rep.warnings) text += "warning: " + w + "\n";
    if (rep.ok && text.empty()) text = "ok\n";
    if (report && capacity > 0) {
      std::strncpy(report, text.c_str(), capacity - 1);
      report[capacity - 1] = '\0';
    }
    return rep.ok ? ANDERSON_OK
                  : set_error(ANDERSON_ECONFIG, "config schema violations");
  } catch (const nlohmann::json::exception& e) {
    if (report && capacity > 0) {
      std::snprintf(report, capacity, "error: %s\n", e.what());
    }
    return set_error(ANDERSON_ECONFIG, e.what());
  } catch (...) {
    return translate();
  }
}

} // extern "C"
