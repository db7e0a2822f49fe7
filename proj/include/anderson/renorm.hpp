#ifndef ANDERSON_RENORM_HPP
#define ANDERSON_RENORM_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "anderson/greens.hpp"
#include "anderson/mollifier.hpp"
#include "anderson/noise.hpp"

namespace anderson {

enum class ConstantsMethod {
  ContinuumQuadrature,
  LatticeSelfEnergy,
  MonteCarloOracle,
};

std::string method_name(ConstantsMethod m);

// Renormalisation constants per (d, a, eps, mollifier): in d=2 the total is
// c1, in d=3 it is c1 + c11 + c12, and in d=1 it is zero by convention.
// Deliberately carries no boundary-condition field: the constants are
// bc-independent.
struct RenormConstants {
  int d = 1;
  double a = 1.0;
  double eps = 0.0;
  std::string mollifier;
  ConstantsMethod method = ConstantsMethod::ContinuumQuadrature;
  double c1 = 0.0;
  double c11 = 0.0; // d = 3 only
  double c12 = 0.0; // d = 3 only
  double total = 0.0;
  double error_estimate = 0.0;
  bool cutoff_sensitive = false; // eps beyond the kernel cutoff scale 2^-n_a
  int n_a = 0;
};

struct McEstimate {
  double value = 0.0;
  double sigma = 0.0;
  std::uint64_t samples = 0;
};

// shared dyadic decomposition per (d, a); immutable after construction
const DyadicDecomposition& decomposition_for(int d, double a);

// unit-scale self-convolution profile s2 = rho * rho (support [0,2]) with
// rho_eps * rho_eps (x) = eps^-d s2(|x|/eps); cached per (d, profile)
class MollifierSquare {
public:
  static const MollifierSquare& get(int d, const MollifierProfile& profile);
  double operator()(double u) const;
  // int_{u0}^{u1} t s2(t) dt
  double primitive(double u0, double u1) const;
  int d() const { return d_; }

private:
  MollifierSquare(int d, const MollifierProfile& profile);
  int d_;
  std::vector<double> nodes_, values_, slopes_;
};

// c_eps^(a) = int P_+^(a)(x) rho_eps*rho_eps(x) dx (zero in d=1 by
// convention). Throws QuadratureFailure if the 1e-6 relative target fails.
double compute_c1(int d, double a, double eps, const MollifierProfile& profile,
                  double* error_out = nullptr, bool* cutoff_sensitive = nullptr);

// the d=3 triple integrals, reduced to radial convolutions
std::pair<double, double> compute_c11_c12(double a, double eps,
                                          const MollifierProfile& profile,
                                          double* error_out = nullptr);

// importance-sampled Monte-Carlo oracles (independent of the quadrature
// pipeline; d >= 2)
McEstimate mc_c1(int d, double a, double eps, const MollifierProfile& profile,
                 std::uint64_t samples, std::uint64_t seed);
McEstimate mc_c11(double a, double eps, const MollifierProfile& profile,
                  std::uint64_t samples, std::uint64_t seed);
McEstimate mc_c12(double a, double eps, const MollifierProfile& profile,
                  std::uint64_t samples, std::uint64_t seed);

// discrete self-energy sum_y G_h(0,y) Cov_xi(y) h^d on a periodic lattice
// with the exact covariance of the discrete mollified noise
double lattice_self_energy(const Grid& grid, double a, double eps,
                           const Mollifier& mol);

RenormConstants renorm_constants(int d, double a, double eps,
                                 const MollifierProfile& profile,
                                 ConstantsMethod method =
                                     ConstantsMethod::ContinuumQuadrature,
                                 const Grid* lattice_grid = nullptr,
                                 std::uint64_t mc_samples = 2000000,
                                 std::uint64_t mc_seed = 20177);

// tilde constants of the L-rescaled operator and the shift
// delta_L = L^-2 C_eps^(1) - C~_eps^(1) at the working eps
struct ScaledConstants {
  double L = 1.0;
  double eps = 0.0;
  RenormConstants base;
  double c1_tilde = 0.0, c11_tilde = 0.0, c12_tilde = 0.0;
  double total_tilde = 0.0;
  double delta_L = 0.0;
  double delta_eps_sensitivity = 0.0; // |delta_L(eps) - delta_L(2 eps)|
  bool cutoff_sensitive = false;      // eps L beyond the validity range
};

ScaledConstants scaled_constants(const RenormConstants& base, double L);

void export_constants_csv(const std::vector<RenormConstants>& rows,
                          const std::string& path);

} // namespace anderson

#endif
