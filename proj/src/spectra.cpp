#include "anderson/spectra.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "anderson/rng.hpp"

namespace anderson {

namespace {

constexpr int kDenseLimit = 600;
constexpr double kClusterGap = 1e-8;

bool is_tridiagonal(const Eigen::SparseMatrix<double>& H) {
  for (int k = 0; k < H.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(H, k); it; ++it)
      if (std::abs(it.row() - it.col()) > 1) return false;
  return true;
}

void certify(const Eigen::SparseMatrix<double>& H, SpectrumResult& res,
             double residual_tol, double row_bound) {
  res.residuals.resize(res.eigenvalues.size());
  bool ok = true;
  for (std::size_t i = 0; i < res.eigenvalues.size(); ++i) {
    const Eigen::VectorXd v = res.eigenvectors.col(static_cast<int>(i));
    const double r = (H * v - res.eigenvalues[i] * v).norm();
    res.residuals[i] = r;
    if (r > residual_tol * (std::abs(res.eigenvalues[i]) + row_bound))
      ok = false;
  }
  res.converged = res.converged && ok;
  // orthogonality certificate
  double w = 0.0;
  for (int i = 0; i < res.eigenvectors.cols(); ++i)
    for (int j = i + 1; j < res.eigenvectors.cols(); ++j)
      w = std::max(w, std::abs(res.eigenvectors.col(i).dot(res.eigenvectors.col(j))));
  res.max_offdiag_overlap = w;
  // multiplicity clusters
  res.clusters.resize(res.eigenvalues.size());
  int cluster = 0;
  for (std::size_t i = 0; i < res.eigenvalues.size(); ++i) {
    if (i > 0 && res.eigenvalues[i] - res.eigenvalues[i - 1] >
                     kClusterGap * std::max(1.0, std::abs(res.eigenvalues[i])))
      ++cluster;
    res.clusters[i] = cluster;
  }
}

SpectrumResult dense_path(const Eigen::SparseMatrix<double>& H, int k) {
  SpectrumResult res;
  res.n_requested = k;
  const int dim = static_cast<int>(H.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  if (is_tridiagonal(H)) {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd sub = Eigen::VectorXd::Zero(std::max(0, dim - 1));
    for (int c = 0; c < H.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(H, c); it; ++it) {
        if (it.row() == it.col())
          diag(it.row()) = it.value();
        else if (it.row() == it.col() + 1)
          sub(it.col()) = it.value();
      }
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  } else {
    es.compute(Eigen::MatrixXd(H));
  }
  res.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + k);
  res.eigenvectors = es.eigenvectors().leftCols(k);
  return res;
}

SpectrumResult lanczos_path(const Eigen::SparseMatrix<double>& H, int k,
                            double residual_tol, std::uint64_t seed,
                            double row_bound) {
  SpectrumResult res;
  res.n_requested = k;
  const Eigen::Index dim = H.rows();

  // shift below the spectrum: Gershgorin lower bound minus 1
  double gersh = 1e300;
  for (int c = 0; c < H.outerSize(); ++c) {
    double diag = 0.0, offsum = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(H, c); it; ++it) {
      if (it.row() == it.col())
        diag = it.value();
      else
        offsum += std::abs(it.value());
    }
    gersh = std::min(gersh, diag - offsum);
  }
  const double sigma = gersh - 1.0;
  Eigen::SparseMatrix<double> shifted = H;
  for (int i = 0; i < shifted.rows(); ++i) shifted.coeffRef(i, i) -= sigma;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> op;
  op.compute(shifted);
  if (op.info() != Eigen::Success)
    throw NotPositiveDefinite("eigensolver: shifted factorization failed");

  // deterministic start vector
  Rng rng(seed, 0x65696773u);
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = rng.next_double() - 0.5;
  v.normalize();

  const int m_cap = static_cast<int>(
      std::min<Eigen::Index>(dim, std::max(3 * k + 200, 120)));
  Eigen::MatrixXd V(dim, m_cap);
  std::vector<double> alpha, beta;
  V.col(0) = v;
  Eigen::VectorXd w(dim);
  int m = 0;
  int check_at = std::min(m_cap, std::max(2 * k + 10, 40));

  auto ritz_converged = [&](int steps) -> bool {
    Eigen::VectorXd diag(steps), sub(std::max(0, steps - 1));
    for (int i = 0; i < steps; ++i) diag(i) = alpha[static_cast<std::size_t>(i)];
    for (int i = 0; i + 1 < steps; ++i) sub(i) = beta[static_cast<std::size_t>(i)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    // largest Ritz values of the inverse map to the lowest eigenvalues
    res.eigenvalues.resize(k);
    res.eigenvectors.resize(dim, k);
    for (int i = 0; i < k; ++i) {
      const int idx = steps - 1 - i;
      const double theta = es.eigenvalues()(idx);
      if (theta <= 0.0) return false;
      res.eigenvalues[static_cast<std::size_t>(i)] = sigma + 1.0 / theta;
      res.eigenvectors.col(i).noalias() =
          V.leftCols(steps) * es.eigenvectors().col(idx);
      res.eigenvectors.col(i).normalize();
    }
    std::vector<int> order(k);
    for (int i = 0; i < k; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int x, int y) {
      return res.eigenvalues[static_cast<std::size_t>(x)] <
             res.eigenvalues[static_cast<std::size_t>(y)];
    });
    std::vector<double> ev(k);
    Eigen::MatrixXd evec(dim, k);
    for (int i = 0; i < k; ++i) {
      ev[static_cast<std::size_t>(i)] = res.eigenvalues[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
      evec.col(i) = res.eigenvectors.col(order[static_cast<std::size_t>(i)]);
    }
    res.eigenvalues = std::move(ev);
    res.eigenvectors = std::move(evec);
    for (int i = 0; i < k; ++i) {
      const Eigen::VectorXd vi = res.eigenvectors.col(i);
      const double r = (H * vi - res.eigenvalues[static_cast<std::size_t>(i)] * vi).norm();
      if (r > residual_tol *
                  (std::abs(res.eigenvalues[static_cast<std::size_t>(i)]) + row_bound))
        return false;
    }
    return true;
  };

  bool done = false;
  for (int j = 0; j < m_cap; ++j) {
    w = op.solve(V.col(j));
    const double a = V.col(j).dot(w);
    alpha.push_back(a);
    w -= a * V.col(j);
    if (j > 0) w -= beta.back() * V.col(j - 1);
    // full reorthogonalization, twice
    for (int pass = 0; pass < 2; ++pass)
      w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
    const double b = w.norm();
    m = j + 1;
    if (b < 1e-12) { // invariant subspace exhausted
      done = ritz_converged(m);
      break;
    }
    if (j + 1 < m_cap) {
      beta.push_back(b);
      V.col(j + 1) = w / b;
    }
    if (m >= check_at || m == m_cap) {
      if (m >= k && ritz_converged(m)) {
        done = true;
        break;
      }
      check_at = std::min(m_cap, check_at + std::max(20, k));
    }
  }
  if (!done && m >= k) done = ritz_converged(m);
  res.converged = done; // partial results keep the flag down
  res.lanczos_dim = m;
  return res;
}

} // namespace

SpectrumResult lowest_eigenpairs(const Eigen::SparseMatrix<double>& H, int k,
                                 double residual_tol, std::uint64_t seed,
                                 bool force_iterative) {
  if (k < 1 || k > 64) throw ConfigError("eigensolver: k must be in [1, 64]");
  if (k >= H.rows()) throw ConfigError("eigensolver: k must be < dim");
  const double row_bound = [&] {
    double hi = 0.0;
    for (int c = 0; c < H.outerSize(); ++c) {
      double s = 0.0;
      for (Eigen::SparseMatrix<double>::InnerIterator it(H, c); it; ++it)
        s += std::abs(it.value());
      hi = std::max(hi, s);
    }
    return hi;
  }();
  SpectrumResult res;
  if (!force_iterative && H.rows() <= kDenseLimit) {
    res = dense_path(H, k);
  } else {
    res = lanczos_path(H, k, residual_tol, seed, row_bound);
  }
  certify(H, res, residual_tol, row_bound);
  return res;
}

ContinuityReport eigenvalue_continuity_check(const Hamiltonian& H1,
                                             const Hamiltonian& H2, int k,
                                             double residual_tol) {
  if (!H1.grid.same_shape(H2.grid))
    throw GridMismatch("continuity check: grids differ");
  ContinuityReport rep;
  // difference of the two operators
  Eigen::SparseMatrix<double> diff = H1.matrix - H2.matrix;
  diff.prune([](const Eigen::Index&, const Eigen::Index&, double v) {
    return std::abs(v) > 0.0;
  });
  bool diagonal = true;
  double max_diag = 0.0;
  for (int c = 0; c < diff.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(diff, c); it; ++it) {
      if (it.row() != it.col() && std::abs(it.value()) > 0.0) diagonal = false;
      if (it.row() == it.col()) max_diag = std::max(max_diag, std::abs(it.value()));
    }
  rep.diagonal_perturbation = diagonal;
  if (diagonal) {
    rep.bound = max_diag;
  } else {
    // symmetric power iteration estimate of ||H1 - H2||_2
    Rng rng(5, 0x7765796cu);
    Eigen::VectorXd v(diff.rows());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.next_double() - 0.5;
    v.normalize();
    double norm = 0.0;
    for (int it = 0; it < 60; ++it) {
      v = diff * v;
      norm = v.norm();
      if (norm == 0.0) break;
      v /= norm;
    }
    rep.bound = norm * 1.05; // mild safety factor on the estimate
  }
  auto s1 = lowest_eigenpairs(H1, k, residual_tol);
  auto s2 = lowest_eigenpairs(H2, k, residual_tol);
  rep.slack = residual_tol * (H1.row_norm_bound() + H2.row_norm_bound() + 2.0);
  rep.ok = true;
  rep.diffs.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const double dl = std::abs(s1.eigenvalues[static_cast<std::size_t>(i)] -
                               s2.eigenvalues[static_cast<std::size_t>(i)]);
    rep.diffs[static_cast<std::size_t>(i)] = dl;
    if (dl > rep.bound + rep.slack) rep.ok = false;
  }
  return rep;
}

void export_spectrum_csv(const std::vector<SpectrumResult>& replicas,
                         const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path + " for writing");
  os << "# anderson-csv v1 spectrum\n";
  os << "replica,n,eigenvalue,residual\n";
  char buf[96];
  for (std::size_t r = 0; r < replicas.size(); ++r)
    for (std::size_t i = 0; i < replicas[r].eigenvalues.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g\n", r, i + 1,
                    replicas[r].eigenvalues[i], replicas[r].residuals[i]);
      os << buf;
    }
}

} // namespace anderson
