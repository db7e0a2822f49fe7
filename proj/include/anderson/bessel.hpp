#ifndef ANDERSON_BESSEL_HPP
#define ANDERSON_BESSEL_HPP

namespace anderson {

// Modified Bessel functions of the second kind, orders 0 and 1, for z > 0.
// Ascending series below z = 2; above, the exact Laplace-integral
// resummation of the large-z expansion, evaluated by generalized
// Gauss-Laguerre quadrature (relative error < 1e-13 on the whole range).
double bessel_k0(double z);
double bessel_k1(double z);

// exponentially scaled variants e^z K_nu(z), stable for large z
double bessel_k0_scaled(double z);
double bessel_k1_scaled(double z);

} // namespace anderson

#endif
