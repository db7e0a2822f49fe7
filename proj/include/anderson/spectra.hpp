#ifndef ANDERSON_SPECTRA_HPP
#define ANDERSON_SPECTRA_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <string>
#include <vector>

#include "anderson/operator.hpp"

namespace anderson {

struct SpectrumResult {
  std::vector<double> eigenvalues; // ascending
  Eigen::MatrixXd eigenvectors;    // orthonormal columns
  std::vector<double> residuals;   // ||Hv - lambda v||_2 per pair
  int n_requested = 0;
  bool converged = true;           // false flags a partial result
  int lanczos_dim = 0;             // 0 for the dense path
  double max_offdiag_overlap = 0.0;
  // multiplicity clusters at relative gap 1e-8: cluster index per pair
  std::vector<int> clusters;
};

// k lowest eigenpairs. Small problems take a dense (tridiagonal-aware)
// path; large ones a shift-invert Lanczos with full reorthogonalization,
// the shift set below the Gershgorin bound so the factored matrix is
// positive definite. Residuals are certified by explicit multiplication
// against residual_tol * (|lambda| + row bound).
SpectrumResult lowest_eigenpairs(const Eigen::SparseMatrix<double>& H, int k,
                                 double residual_tol = 1e-9,
                                 std::uint64_t seed = 1,
                                 bool force_iterative = false);

inline SpectrumResult lowest_eigenpairs(const Hamiltonian& H, int k,
                                        double residual_tol = 1e-9,
                                        std::uint64_t seed = 1) {
  return lowest_eigenpairs(H.matrix, k, residual_tol, seed);
}

struct ContinuityReport {
  std::vector<double> diffs; // |lambda_n(H1) - lambda_n(H2)|
  double bound = 0.0;        // max potential difference (diagonal case)
  bool diagonal_perturbation = false;
  bool ok = false;           // all diffs <= bound + certification slack
  double slack = 0.0;
};

// Weyl bound |lambda_n(H1) - lambda_n(H2)| <= ||H1 - H2||_2 specialized to
// diagonal (potential) perturbations
ContinuityReport eigenvalue_continuity_check(const Hamiltonian& H1,
                                             const Hamiltonian& H2, int k,
                                             double residual_tol = 1e-10);

void export_spectrum_csv(const std::vector<SpectrumResult>& replicas,
                         const std::string& path);

} // namespace anderson

#endif
