#ifndef ANDERSON_OPERATOR_HPP
#define ANDERSON_OPERATOR_HPP

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <memory>
#include <string>
#include <vector>

#include "anderson/grid.hpp"
#include "anderson/noise.hpp"

namespace anderson {

// -Delta_h + diag(potential + C) with the 2d+1 point stencil; periodic
// wraps, Dirichlet drops boundary neighbours. Assembly fills the lower
// triangle and mirrors it, so the matrix is bitwise symmetric.
struct Hamiltonian {
  Grid grid;
  double shift_C = 0.0;
  Eigen::SparseMatrix<double> matrix;

  // Gershgorin bound: min_i (a_ii - sum_{j != i} |a_ij|) <= lambda_min
  double gershgorin_lower() const;
  // max_i sum_j |a_ij| >= ||H||_2
  double row_norm_bound() const;
};

Hamiltonian assemble(const Grid& grid, const NoiseField& potential, double C);

struct SolverOptions {
  double tol = 1e-10; // relative residual / step tolerance
  int max_iter = 50000;
};

// conjugate gradient for SPD systems; returns iterations via iters
Eigen::VectorXd cg_solve(const Eigen::SparseMatrix<double>& A,
                         const Eigen::VectorXd& rhs, double tol, int max_iter,
                         int* iters = nullptr);

// (H + a)^{-1} applied by conjugate gradients; construction verifies
// positive definiteness by a smallest-eigenvalue probe
class ResolventHandle {
public:
  ResolventHandle(const Hamiltonian& H, double a, SolverOptions opts = {});

  Eigen::VectorXd apply(const Eigen::VectorXd& g) const;

  double a() const { return a_; }
  const SolverOptions& options() const { return opts_; }
  double smallest_eigenvalue_bound() const { return lambda_min_bound_; }

private:
  Eigen::SparseMatrix<double> shifted_;
  double a_;
  SolverOptions opts_;
  double lambda_min_bound_;
};

struct FixedPointTrace {
  std::vector<double> step_norms;        // ||f_{k+1} - f_k|| / ||g||
  std::vector<double> contraction_ratios; // successive step-norm ratios
  int iterations = 0;
  bool converged = false;
};

struct FixedPointResult {
  Eigen::VectorXd f;
  FixedPointTrace trace;
};

// Iterates f <- (-Delta_h + a)^{-1} (g - (xi + C + b) f) until the step norm
// drops below opts.tol, or flags divergence after five consecutive
// non-contracting steps (a below the realization's admissibility threshold).
FixedPointResult fixed_point_resolvent(const Grid& grid, const NoiseField& noise,
                                       double C, double a, double b,
                                       const Eigen::VectorXd& g,
                                       SolverOptions opts = {});

// coordinate triplet text export for debugging
void export_matrix_triplets(const Hamiltonian& H, const std::string& path);

// crude Lanczos estimate of the smallest eigenvalue (no reorthogonalization;
// used for positive definiteness probes)
double lanczos_lambda_min_estimate(const Eigen::SparseMatrix<double>& A,
                                   int steps = 64, std::uint64_t seed = 99);

} // namespace anderson

#endif
