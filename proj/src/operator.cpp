#include "anderson/operator.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "anderson/rng.hpp"

namespace anderson {

Hamiltonian assemble(const Grid& grid, const NoiseField& potential, double C) {
  if (!grid.same_shape(potential.grid))
    throw GridMismatch("assemble: potential grid does not match target grid");
  if (potential.kind == NoiseKind::White)
    throw GridMismatch("assemble: potential must be mollified or deterministic");

  const int d = grid.d;
  const int n = grid.sites_per_axis();
  const std::int64_t dim = grid.num_sites();
  const double inv_h2 = 1.0 / (grid.h() * grid.h());

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(dim) * (d + 1) * 2);
  const double off = -inv_h2;
  for (std::int64_t i = 0; i < dim; ++i) {
    const auto idx = grid.unflatten(i);
    trip.emplace_back(i, i,
                      2.0 * d * inv_h2 +
                          potential.values[static_cast<std::size_t>(i)] + C);
    // lower-triangle couplings to the "previous" neighbour on each axis,
    // mirrored explicitly
    for (int ax = 0; ax < d; ++ax) {
      auto nb = idx;
      if (grid.bc == Bc::Dirichlet) {
        if (idx[ax] == 0) continue; // dropped: field vanishes on the boundary
        nb[ax] = idx[ax] - 1;
      } else {
        nb[ax] = (idx[ax] + n - 1) % n;
        if (nb[ax] == idx[ax]) continue;
      }
      const std::int64_t j = grid.flatten(nb);
      if (j == i) continue;
      trip.emplace_back(i, j, off);
      trip.emplace_back(j, i, off);
    }
  }
  Hamiltonian H;
  H.grid = grid;
  H.shift_C = C;
  H.matrix.resize(dim, dim);
  H.matrix.setFromTriplets(trip.begin(), trip.end());
  H.matrix.makeCompressed();
  return H;
}

double Hamiltonian::gershgorin_lower() const {
  double lo = 1e300;
  for (int k = 0; k < matrix.outerSize(); ++k) {
    double diag = 0.0, offsum = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(matrix, k); it; ++it) {
      if (it.row() == it.col())
        diag = it.value();
      else
        offsum += std::abs(it.value());
    }
    lo = std::min(lo, diag - offsum);
  }
  return lo;
}

double Hamiltonian::row_norm_bound() const {
  double hi = 0.0;
  for (int k = 0; k < matrix.outerSize(); ++k) {
    double s = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(matrix, k); it; ++it)
      s += std::abs(it.value());
    hi = std::max(hi, s);
  }
  return hi;
}

Eigen::VectorXd cg_solve(const Eigen::SparseMatrix<double>& A,
                         const Eigen::VectorXd& rhs, double tol, int max_iter,
                         int* iters) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(rhs.size());
  Eigen::VectorXd r = rhs;
  Eigen::VectorXd p = r;
  Eigen::VectorXd Ap(rhs.size());
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) {
    if (iters) *iters = 0;
    return x;
  }
  double rs = r.squaredNorm();
  for (int it = 0; it < max_iter; ++it) {
    Ap.noalias() = A * p;
    const double alpha = rs / p.dot(Ap);
    x += alpha * p;
    r -= alpha * Ap;
    const double rs_new = r.squaredNorm();
    if (std::sqrt(rs_new) <= tol * rhs_norm) {
      if (iters) *iters = it + 1;
      return x;
    }
    p = r + (rs_new / rs) * p;
    rs = rs_new;
  }
  throw MaxIterations("cg: no convergence within " + std::to_string(max_iter) +
                      " iterations");
}

double lanczos_lambda_min_estimate(const Eigen::SparseMatrix<double>& A,
                                   int steps, std::uint64_t seed) {
  const auto dim = A.rows();
  steps = std::min<int>(steps, static_cast<int>(dim));
  Rng rng(seed, 0x6c616eu);
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = rng.next_double() - 0.5;
  v.normalize();
  Eigen::VectorXd v_prev = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd alpha(steps), beta(steps);
  double beta_prev = 0.0;
  Eigen::VectorXd w(dim);
  int m = 0;
  for (int j = 0; j < steps; ++j) {
    w.noalias() = A * v;
    const double a = v.dot(w);
    w -= a * v + beta_prev * v_prev;
    const double b = w.norm();
    alpha(j) = a;
    m = j + 1;
    if (b < 1e-13) break;
    beta(j) = b;
    v_prev = v;
    v = w / b;
    beta_prev = b;
  }
  Eigen::VectorXd diag = alpha.head(m), sub = beta.head(std::max(0, m - 1));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

ResolventHandle::ResolventHandle(const Hamiltonian& H, double a,
                                 SolverOptions opts)
    : shifted_(H.matrix), a_(a), opts_(opts) {
  for (int i = 0; i < shifted_.rows(); ++i) shifted_.coeffRef(i, i) += a;
  const double gersh = H.gershgorin_lower() + a;
  if (gersh > 0.0) {
    lambda_min_bound_ = gersh;
  } else {
    lambda_min_bound_ = lanczos_lambda_min_estimate(shifted_);
    if (lambda_min_bound_ <= 0.0)
      throw NotPositiveDefinite(
          "resolvent: H + a is not positive definite (lambda_min estimate " +
          std::to_string(lambda_min_bound_) + ")");
  }
}

Eigen::VectorXd ResolventHandle::apply(const Eigen::VectorXd& g) const {
  return cg_solve(shifted_, g, opts_.tol, opts_.max_iter);
}

FixedPointResult fixed_point_resolvent(const Grid& grid,
                                       const NoiseField& noise, double C,
                                       double a, double b,
                                       const Eigen::VectorXd& g,
                                       SolverOptions opts) {
  if (!(b > -2.0 && b < 2.0))
    throw ConfigError("fixed point: b must lie in (-2,2)");
  if (!(a >= 1.0)) throw ConfigError("fixed point: a must be >= 1");
  if (!grid.same_shape(noise.grid))
    throw GridMismatch("fixed point: noise grid mismatch");
  if (g.size() != grid.num_sites())
    throw GridMismatch("fixed point: right-hand side size mismatch");

  // constant-coefficient solve (-Delta_h + a), factored once
  NoiseField zero;
  zero.grid = grid;
  zero.kind = NoiseKind::Deterministic;
  zero.values.assign(static_cast<std::size_t>(grid.num_sites()), 0.0);
  Hamiltonian lap = assemble(grid, zero, 0.0);
  for (int i = 0; i < lap.matrix.rows(); ++i) lap.matrix.coeffRef(i, i) += a;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  solver.compute(lap.matrix);
  if (solver.info() != Eigen::Success)
    throw NotPositiveDefinite("fixed point: factorization of -Delta + a failed");

  const Eigen::Map<const Eigen::VectorXd> xi(noise.values.data(),
                                             static_cast<Eigen::Index>(noise.values.size()));
  const double g_norm = g.norm();
  FixedPointResult res;
  res.f = Eigen::VectorXd::Zero(g.size());
  Eigen::VectorXd rhs(g.size()), next(g.size());
  double prev_step = -1.0;
  int bad_streak = 0;
  const int max_sweeps = 400;
  for (int it = 0; it < max_sweeps; ++it) {
    rhs = g - (xi.array() * res.f.array()).matrix() - (C + b) * res.f;
    next = solver.solve(rhs);
    const double step = (next - res.f).norm() / (g_norm > 0 ? g_norm : 1.0);
    res.f = next;
    res.trace.step_norms.push_back(step);
    if (prev_step > 0.0) {
      const double ratio = step / prev_step;
      res.trace.contraction_ratios.push_back(ratio);
      bad_streak = ratio >= 1.0 ? bad_streak + 1 : 0;
    }
    res.trace.iterations = it + 1;
    if (step <= opts.tol) {
      res.trace.converged = true;
      return res;
    }
    if (bad_streak >= 5) {
      res.trace.converged = false; // diverged: a below admissibility
      return res;
    }
    prev_step = step;
  }
  res.trace.converged = false;
  return res;
}

void export_matrix_triplets(const Hamiltonian& H, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path + " for writing");
  os << "# anderson-csv v1 matrix-triplets\n";
  os << "row,col,value\n";
  char buf[96];
  for (int k = 0; k < H.matrix.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(H.matrix, k); it; ++it) {
      std::snprintf(buf, sizeof buf, "%ld,%ld,%.17g\n",
                    static_cast<long>(it.row()), static_cast<long>(it.col()),
                    it.value());
      os << buf;
    }
}

} // namespace anderson
