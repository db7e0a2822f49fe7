#ifndef ANDERSON_QUADRATURE_HPP
#define ANDERSON_QUADRATURE_HPP

#include <functional>
#include <vector>

namespace anderson {

struct QuadResult {
  double value = 0.0;
  double error = 0.0; // estimated absolute error
};

// adaptive Simpson with absolute/relative targets; throws QuadratureFailure
// if the depth cap is hit before the target is met
QuadResult integrate_adaptive(const std::function<double(double)>& f, double a,
                              double b, double abs_tol, double rel_tol,
                              int max_depth = 40);

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre on [-1,1]
const GaussRule& gauss_legendre(int n);
// generalized Gauss-Laguerre for weight u^alpha e^-u on [0,inf)
GaussRule gauss_laguerre(int n, double alpha);

// fixed-order Gauss-Legendre integral of f on [a,b]
double integrate_gauss(const std::function<double(double)>& f, double a,
                       double b, int n = 16);

} // namespace anderson

#endif
