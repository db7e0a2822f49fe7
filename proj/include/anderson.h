/* C interface to the Anderson hamiltonian simulator.
 *
 * All objects are opaque handles created and destroyed through this API;
 * functions return a status code and write results through out-parameters.
 * On any failure the thread-local message from anderson_last_error()
 * describes the cause.
 */
#ifndef ANDERSON_H
#define ANDERSON_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  ANDERSON_OK = 0,
  ANDERSON_EINVAL = 1,           /* invalid argument */
  ANDERSON_ECONFIG = 2,          /* configuration / schema violation */
  ANDERSON_ENUMERIC = 3,         /* numerical failure */
  ANDERSON_EPARTIAL = 4,         /* partial results were produced */
  ANDERSON_EUNRESOLVED = 5,      /* mollifier below the resolution floor */
  ANDERSON_EGRID = 6,            /* grid mismatch */
  ANDERSON_ESINGULAR = 7,        /* kernel evaluated at its singularity */
  ANDERSON_EQUADRATURE = 8,      /* quadrature target not reached */
  ANDERSON_ENOTPOSDEF = 9,       /* operator shift not positive definite */
  ANDERSON_EMAXITER = 10,        /* iterative solver hit its cap */
  ANDERSON_EDIVERGED = 11,       /* fixed point stopped contracting */
  ANDERSON_ENOCONV = 12,         /* eigensolver did not certify */
  ANDERSON_EGEOMETRY = 13,       /* geometric constraint violated */
  ANDERSON_ETAILMASS = 14,       /* not enough tail exceedances */
  ANDERSON_EIO = 15              /* file system failure */
} anderson_status;

const char* anderson_version(void);
const char* anderson_last_error(void);

/* ------------------------------------------------------------- lattices */

typedef struct anderson_grid anderson_grid;

#define ANDERSON_BC_DIRICHLET 0
#define ANDERSON_BC_PERIODIC 1

anderson_status anderson_grid_create(int d, double half_width_L, int N,
                                     int bc, anderson_grid** out);
void anderson_grid_free(anderson_grid* grid);
int64_t anderson_grid_sites(const anderson_grid* grid);
double anderson_grid_mesh(const anderson_grid* grid);

/* --------------------------------------------------------- noise fields */

typedef struct anderson_field anderson_field;

anderson_status anderson_sample_white(const anderson_grid* grid,
                                      uint64_t seed, anderson_field** out);
anderson_status anderson_mollify(const anderson_field* field, double eps,
                                 const char* mollifier_profile,
                                 anderson_field** out);
anderson_status anderson_rescale_noise(const anderson_field* field,
                                       double L, anderson_field** out);
void anderson_field_free(anderson_field* field);
int64_t anderson_field_size(const anderson_field* field);
anderson_status anderson_field_values(const anderson_field* field,
                                      double* buffer, int64_t capacity);
anderson_status anderson_field_export_csv(const anderson_field* field,
                                          const char* path);
anderson_status anderson_field_export_binary(const anderson_field* field,
                                             const char* path);

/* ------------------------------------------------------ Green's kernels */

typedef struct anderson_greens anderson_greens;

anderson_status anderson_greens_create(int d, double a, anderson_greens** out);
void anderson_greens_free(anderson_greens* g);
int anderson_greens_cutoff_index(const anderson_greens* g);
/* P^(a) at radius r (exact closed forms; Bessel K0 for d = 2) */
anderson_status anderson_greens_eval(const anderson_greens* g, double r,
                                     double* out);
/* dyadic layer P_n^(a) and the smooth remainder P_-^(a) at radius r */
anderson_status anderson_greens_layer(const anderson_greens* g, int n,
                                      double r, double* out);
anderson_status anderson_greens_remainder(const anderson_greens* g, double r,
                                          double* out);
/* reflected Dirichlet (or periodic) kernel K^(a)(x,y); x,y are d-vectors */
anderson_status anderson_greens_eval_reflected(const anderson_greens* g,
                                               double L, int bc,
                                               const double* x,
                                               const double* y, double* out,
                                               double* tail_bound);

/* ----------------------------------------------- renormalisation constants */

/* method: 0 continuum quadrature, 1 lattice self-energy (needs grid),
 * 2 Monte-Carlo oracle */
anderson_status anderson_renorm_total(int d, double a, double eps,
                                      const char* mollifier_profile,
                                      int method, const anderson_grid* grid,
                                      double* total, double* error_estimate);
anderson_status anderson_renorm_parts(int d, double a, double eps,
                                      const char* mollifier_profile,
                                      double* c1, double* c11, double* c12);
/* tilde constants of the L-dilated box and delta_L = L^-2 C - C~ */
anderson_status anderson_renorm_scaled(int d, double eps,
                                       const char* mollifier_profile,
                                       double L, double* total_tilde,
                                       double* delta_L);

/* -------------------------------------------------------------- operators */

typedef struct anderson_operator anderson_operator;

anderson_status anderson_assemble(const anderson_grid* grid,
                                  const anderson_field* potential, double C,
                                  anderson_operator** out);
void anderson_operator_free(anderson_operator* op);
anderson_status anderson_operator_export_triplets(const anderson_operator* op,
                                                  const char* path);

/* f = (H + a)^{-1} g by conjugate gradients */
anderson_status anderson_resolvent_apply(const anderson_operator* op, double a,
                                         const double* g, double* f,
                                         int64_t size, double tol,
                                         int max_iter);
/* fixed point of f -> (-Delta+a)^{-1}(g - (xi + C + b) f); returns the
 * number of iterations and the final contraction ratio */
anderson_status anderson_fixed_point(const anderson_grid* grid,
                                     const anderson_field* noise, double C,
                                     double a, double b, const double* g,
                                     double* f, int64_t size, double tol,
                                     int* iterations, double* last_ratio);

/* ---------------------------------------------------------------- spectra */

typedef struct anderson_spectrum anderson_spectrum;

anderson_status anderson_lowest_eigenpairs(const anderson_operator* op, int k,
                                           double residual_tol, uint64_t seed,
                                           anderson_spectrum** out);
void anderson_spectrum_free(anderson_spectrum* s);
int anderson_spectrum_count(const anderson_spectrum* s);
double anderson_spectrum_eigenvalue(const anderson_spectrum* s, int i);
double anderson_spectrum_residual(const anderson_spectrum* s, int i);
int anderson_spectrum_converged(const anderson_spectrum* s);
anderson_status anderson_spectrum_eigenvector(const anderson_spectrum* s,
                                              int i, double* buffer,
                                              int64_t capacity);

/* -------------------------------------------------------------- experiments */

/* Runs one experiment described by a JSON config string; subcommand is one
 * of spectrum|converge|scaling|tail|renorm|bump|kernel-check. CSV outputs
 * plus a manifest are written into out_dir. Returns ANDERSON_OK,
 * ANDERSON_ECONFIG, ANDERSON_ENUMERIC or ANDERSON_EPARTIAL as the run
 * dictates (mirroring the CLI exit codes). */
anderson_status anderson_run_json(const char* subcommand,
                                  const char* config_json,
                                  const char* out_dir, int plots);

/* Validates a config JSON string; writes a human-readable report. Returns
 * ANDERSON_OK when the schema is satisfied (warnings allowed). */
anderson_status anderson_validate_config(const char* config_json,
                                         char* report, size_t capacity);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ANDERSON_H */
