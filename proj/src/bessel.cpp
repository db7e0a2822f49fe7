#include "anderson/bessel.hpp"

#include <cmath>
#include <mutex>

#include "anderson/errors.hpp"
#include "anderson/quadrature.hpp"

namespace anderson {

namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209008240;

// ascending series, z in (0, 2]
void k0_k1_series(double z, double* k0, double* k1) {
  const double q = 0.25 * z * z;
  const double lg = std::log(0.5 * z);
  if (k0) {
    // K0 = -(ln(z/2)+gamma) I0 + sum_{k>=1} q^k/(k!)^2 H_k
    double term = 1.0, i0 = 1.0, correction = 0.0, hk = 0.0;
    for (int k = 1; k < 60; ++k) {
      term *= q / (static_cast<double>(k) * k);
      hk += 1.0 / k;
      i0 += term;
      correction += term * hk;
      if (term < 1e-18 * i0) break;
    }
    *k0 = -(lg + kEulerGamma) * i0 + correction;
  }
  if (k1) {
    // K1 = 1/z + ln(z/2) I1 - (z/4) sum_k (H_k + H_{k+1} - 2 gamma) q^k / (k!(k+1)!)
    double term = 1.0; // q^k / (k! (k+1)!)
    double i1sum = 1.0, corr = (1.0 - 2.0 * kEulerGamma), hk = 0.0,
           hk1 = 1.0;
    for (int k = 1; k < 60; ++k) {
      term *= q / (static_cast<double>(k) * (k + 1));
      hk += 1.0 / k;
      hk1 += 1.0 / (k + 1);
      i1sum += term;
      corr += term * (hk + hk1 - 2.0 * kEulerGamma);
      if (term < 1e-18 * i1sum) break;
    }
    const double i1 = 0.5 * z * i1sum;
    *k1 = 1.0 / z + lg * i1 - 0.25 * z * corr;
  }
}

struct LaguerreRules {
  GaussRule half_minus; // alpha = -1/2
  GaussRule half_plus;  // alpha = +1/2
};

const LaguerreRules& laguerre_rules() {
  static LaguerreRules rules = [] {
    LaguerreRules r;
    r.half_minus = gauss_laguerre(120, -0.5);
    r.half_plus = gauss_laguerre(120, 0.5);
    return r;
  }();
  return rules;
}

// e^z K_nu(z) for z > 2 via K_nu(z) = sqrt(pi/2z) e^-z / Gamma(nu+1/2)
//   * int_0^inf e^-u u^{nu-1/2} (1+u/2z)^{nu-1/2} du
double scaled_large(double z, int nu) {
  const LaguerreRules& r = laguerre_rules();
  const GaussRule& rule = nu == 0 ? r.half_minus : r.half_plus;
  const double p = nu == 0 ? -0.5 : 0.5;
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    sum += rule.weights[i] * std::pow(1.0 + rule.nodes[i] / (2.0 * z), p);
  const double gamma_nu_half = nu == 0 ? 1.77245385090551602730 /* sqrt(pi) */
                                       : 0.88622692545275801365 /* sqrt(pi)/2 */;
  return std::sqrt(M_PI / (2.0 * z)) * sum / gamma_nu_half;
}

} // namespace

double bessel_k0(double z) {
  if (!(z > 0.0)) throw SingularPoint("bessel_k0: argument must be positive");
  if (z <= 2.0) {
    double k0;
    k0_k1_series(z, &k0, nullptr);
    return k0;
  }
  return std::exp(-z) * scaled_large(z, 0);
}

double bessel_k1(double z) {
  if (!(z > 0.0)) throw SingularPoint("bessel_k1: argument must be positive");
  if (z <= 2.0) {
    double k1;
    k0_k1_series(z, nullptr, &k1);
    return k1;
  }
  return std::exp(-z) * scaled_large(z, 1);
}

double bessel_k0_scaled(double z) {
  if (!(z > 0.0)) throw SingularPoint("bessel_k0_scaled: argument must be positive");
  if (z <= 2.0) {
    double k0;
    k0_k1_series(z, &k0, nullptr);
    return std::exp(z) * k0;
  }
  return scaled_large(z, 0);
}

double bessel_k1_scaled(double z) {
  if (!(z > 0.0)) throw SingularPoint("bessel_k1_scaled: argument must be positive");
  if (z <= 2.0) {
    double k1;
    k0_k1_series(z, nullptr, &k1);
    return std::exp(z) * k1;
  }
  return scaled_large(z, 1);
}

} // namespace anderson
