#ifndef ANDERSON_GREENS_HPP
#define ANDERSON_GREENS_HPP

#include <array>
#include <mutex>
#include <string>
#include <vector>

#include "anderson/errors.hpp"
#include "anderson/grid.hpp"

namespace anderson {

// smooth transition built from the bump primitive: 1 on [0,1/2], 0 on
// [1,inf), strictly decreasing in between with flat derivatives at the ends
double omega_cut(double x);
// partition function phi(x) = omega(x) - omega(2x): supported in [1/4,1]
// with sum_n phi(2^n x) = 1 for every x > 0
double phi_partition(double x);

// Whole-space Green's function P^(a) of -Delta + a on R^d, d in {1,2,3}.
class GreensKernel {
public:
  GreensKernel(int d, double a);

  int d() const { return d_; }
  double a() const { return a_; }
  double sqrt_a() const { return sqrt_a_; }
  // smallest n with 2^-n <= 1/sqrt(a)
  int cutoff_index() const { return n_a_; }

  // P^(a) at radius r > 0 (r = 0 allowed only for d = 1)
  double eval_radial(double r) const;
  double eval(const double* x) const;

private:
  int d_;
  double a_, sqrt_a_;
  int n_a_;
};

// Dyadic decomposition P = P_- + sum_{n>=n_a} P_n where each layer P_n is
// supported in |x| <= 2^-n, obeys |d^k P_n| <= C 2^{n(d-2+|k|)} and
// annihilates polynomials of degree < r. Correction terms use a radial
// pair eta_0 (unit mass, zero second moment) and eta_Q (zero mass, unit
// second moments), which is equivalent to the generic eta_k family because
// the uncorrected layers are radial: only the k = 0 and |k| = 2 diagonal
// moments are nonzero.
class DyadicDecomposition {
public:
  DyadicDecomposition(const GreensKernel& kernel, int r = 4, int n_levels = 28);

  const GreensKernel& kernel() const { return kernel_; }
  int r() const { return r_; }
  int n_a() const { return kernel_.cutoff_index(); }
  int max_level() const { return n_a() + n_levels_ - 1; }

  // corrected layer P_n at radius rr
  double layer_radial(int n, double rr) const;
  double layer(int n, const double* x) const;
  // uncorrected layer \bar P_n
  double layer_base_radial(int n, double rr) const;
  // smooth remainder P_-
  double remainder_radial(double rr) const;
  double remainder(const double* x) const;
  // singular part P_+ = P - P_- (cheap closed form, exact to quadrature
  // accuracy of the correction coefficients)
  double plus_radial(double rr) const;

  // moment coefficient I_{k,n} for any multi-index |k| < r (zero unless
  // k = 0 or k = 2 e_i)
  double moment_coeff(const std::array<int, 3>& k, int n) const;

  // integral of t P_+(t) dt on [u0,u1], used by radial convolutions
  double plus_primitive(double u0, double u1) const;

private:
  double i0(int n) const; // I_{0,n}
  double i2(int n) const; // I_{2 e_i, n}
  double eta0_scaled(int n, double rr) const;
  double etaq_scaled(int n, double rr) const;
  double tail_sum_radial(int n, double rr) const; // sum_{l>=n} \bar P_l

  const GreensKernel kernel_;
  int r_;
  int n_levels_;
  // lazily built cumulative table of t P_+(t), used by plus_primitive
  mutable std::once_flag prim_once_;
  mutable std::vector<double> prim_cum_;
  mutable double prim_step_ = 0.0;
  void build_primitive_table() const;
  // correction polynomials eta = (beta |x|^2 + gamma |x|^4) w(|x|)
  double eta0_beta_, eta0_gamma_, etaq_beta_, etaq_gamma_;
  std::vector<double> i0_, i2_; // indexed by n - n_a
  // d = 2 taper integral cache
  double e0_ = 0.0;
};

// Green's function of -Delta + a on (-L,L)^d via the reflection series
// K(x,y) = sum_m eps_m P(x - pi_m(y)), eps_m = (-1)^{sum m_i}; the periodic
// version degenerates to K(x,y) = P(x-y).
class ReflectedKernel {
public:
  ReflectedKernel(const GreensKernel& kernel, double L, Bc bc,
                  int truncation = -1, double tail_tol = 1e-12);

  const GreensKernel& kernel() const { return kernel_; }
  double L() const { return L_; }
  Bc bc() const { return bc_; }
  int truncation() const { return M_; }
  // bound on the dropped reflection mass
  double tail_bound() const { return tail_bound_; }

  double eval(const double* x, const double* y) const;

  // reflection map pi_{m,L}
  static void reflect(const double* y, const int* m, double L, int d,
                      double* out);
  static int reflection_sign(const int* m, int d);

  // K_n(x,y) = P_n(x-y) + Z_n(x,y) with the cutoff chi_n(y) applied; only
  // first-shell reflections contribute under the cutoff
  double layer_eval(const DyadicDecomposition& dec, int n, const double* x,
                    const double* y) const;
  double chi_cutoff(int n, const double* y) const;

private:
  GreensKernel kernel_;
  double L_;
  Bc bc_;
  int M_;
  double tail_bound_;
};

// min(1/sqrt(a), dist(x, boundary of (-L,L)^d))
double boundary_distance(const double* x, int d, double L, double a);

struct BoundaryDecayReport {
  bool applicable = false;      // Dirichlet only
  int levels_checked = 0;
  // per (n, x) samples: ratio sup_y |K_n(x,y)| / (2^{-n(1-d)} |x|_P)
  std::vector<double> ratios;
  double ratio_min = 0.0, ratio_max = 0.0;
  // fitted slope sup / (2^{-n(1-d)} |x|_P) at the smallest probed distance
  double slope = 0.0;
  double boundary_sup = 0.0;    // sup_y |K_n(x,y)| for x on the boundary
  // fitted slopes sup/|x|_P at two different |x|_P per level; their ratio
  // should be stable under halving the distance
  std::vector<double> halving_ratios;
};

BoundaryDecayReport boundary_decay_check(const ReflectedKernel& refl,
                                         const DyadicDecomposition& dec,
                                         int n, int n_distances = 3,
                                         int sup_samples = 400);

// kernel table export for plotting: radius,value,layer (layer -1 denotes
// the full kernel, -2 the remainder)
void export_kernel_csv(const DyadicDecomposition& dec, const std::string& path,
                       int samples_per_layer = 128);

} // namespace anderson

#endif
