#ifndef ANDERSON_MOLLIFIER_HPP
#define ANDERSON_MOLLIFIER_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "anderson/grid.hpp"

namespace anderson {

// Radial profile of an even, smooth bump supported in the unit ball.
// `shape` is the unnormalized radial shape; the normalization to unit
// integral over R^d is computed numerically per dimension and cached.
struct MollifierProfile {
  std::string name;
  std::function<double(double)> shape; // shape(r) for r >= 0, zero for r >= 1

  static const MollifierProfile& standard_bump();
  // a second admissible profile, used to probe mollifier-independence
  static const MollifierProfile& sharp_bump();
  static const MollifierProfile& by_name(const std::string& name);
};

class Mollifier {
public:
  Mollifier(int d, double epsilon,
            const MollifierProfile& profile = MollifierProfile::standard_bump());

  int d() const { return d_; }
  double epsilon() const { return eps_; }
  const std::string& profile_name() const { return profile_.name; }

  // normalized continuum density rho_eps(x) = eps^-d rho(x/eps), radial
  double density(double r) const;
  // unit-scale normalized density rho(r)
  double unit_density(double r) const;

  // lattice sample of rho_eps on offsets |j|h <= eps, renormalized so that
  // sum * h^d = 1 exactly; offsets and weights share indexing
  struct DiscreteKernel {
    int d = 1;
    int radius = 0;                   // offsets range over [-radius, radius]^d
    std::vector<double> weights;      // size (2*radius+1)^d
    double h = 0.0;
    double weight(const std::array<int, 3>& off) const;
  };
  DiscreteKernel discretize(const Grid& grid) const;

private:
  int d_;
  double eps_;
  MollifierProfile profile_;
  double norm_; // 1 / integral of shape over R^d
};

// integral of f(r) r^{d-1} dS_d over the radial coordinate, i.e. the full
// R^d integral of a radial function (composite Simpson on [0, rmax])
double radial_integral(int d, const std::function<double(double)>& f,
                       double rmax, int panels = 4096);

double sphere_area(int d); // |S^{d-1}|: 2, 2*pi, 4*pi

} // namespace anderson

#endif
