#include "anderson/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <mutex>

#include "anderson/errors.hpp"

namespace anderson {

namespace {

struct Simpson {
  const std::function<double(double)>& f;
  double abs_tol, rel_tol;
  int max_depth;
  double err_acc = 0.0;

  double recurse(double a, double m, double b, double fa, double fm, double fb,
                 double whole, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    const double tol = std::max(abs_tol, rel_tol * std::abs(left + right));
    if (depth >= max_depth) {
      if (std::abs(delta) > 15.0 * tol)
        throw QuadratureFailure("adaptive quadrature: depth cap reached");
      err_acc += std::abs(delta) / 15.0;
      return left + right + delta / 15.0;
    }
    if (std::abs(delta) <= 15.0 * tol) {
      err_acc += std::abs(delta) / 15.0;
      return left + right + delta / 15.0;
    }
    return recurse(a, lm, m, fa, flm, fm, left, depth + 1) +
           recurse(m, rm, b, fm, frm, fb, right, depth + 1);
  }
};

GaussRule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub,
                       double mu0) {
  const int n = static_cast<int>(diag.size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = es.eigenvalues()(i);
    const double q0 = es.eigenvectors()(0, i);
    rule.weights[i] = mu0 * q0 * q0;
  }
  return rule;
}

} // namespace

QuadResult integrate_adaptive(const std::function<double(double)>& f, double a,
                              double b, double abs_tol, double rel_tol,
                              int max_depth) {
  if (a == b) return {0.0, 0.0};
  Simpson s{f, abs_tol, rel_tol, max_depth};
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  // split once up front so narrow features near the midpoint are not missed
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  (void)whole;
  QuadResult res;
  res.value = s.recurse(a, lm, m, fa, flm, fm, left, 0) +
              s.recurse(m, rm, b, fm, frm, fb, right, 0);
  res.error = s.err_acc;
  return res;
}

const GaussRule& gauss_legendre(int n) {
  static std::map<int, GaussRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (int k = 1; k < n; ++k)
    sub(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  cache[n] = golub_welsch(diag, sub, 2.0);
  return cache[n];
}

GaussRule gauss_laguerre(int n, double alpha) {
  Eigen::VectorXd diag(n), sub(n - 1);
  for (int k = 0; k < n; ++k) diag(k) = 2.0 * k + alpha + 1.0;
  for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(k * (k + alpha));
  return golub_welsch(diag, sub, std::tgamma(alpha + 1.0));
}

double integrate_gauss(const std::function<double(double)>& f, double a,
                       double b, int n) {
  const GaussRule& rule = gauss_legendre(n);
  const double c = 0.5 * (a + b), s = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    acc += rule.weights[i] * f(c + s * rule.nodes[i]);
  return acc * s;
}

} // namespace anderson
