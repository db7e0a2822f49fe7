#include "anderson/greens.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "anderson/bessel.hpp"
#include "anderson/mollifier.hpp"
#include "anderson/quadrature.hpp"

namespace anderson {

namespace {

inline double bump_exp(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

inline double pow2(int n) { return std::ldexp(1.0, n); } // 2^n

inline double norm2(const double* x, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += x[i] * x[i];
  return std::sqrt(s);
}

// correction bump w supported in |x| < 1/2
inline double w_bump(double r) {
  const double u = 2.0 * r;
  return u < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0;
}

// panelled Gauss for the bumpy partition integrands
double composite_gauss(const std::function<double(double)>& f, double a,
                       double b, int panels = 8, int order = 16) {
  if (b <= a) return 0.0;
  double acc = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double lo = a + (b - a) * i / panels;
    const double hi = a + (b - a) * (i + 1) / panels;
    acc += integrate_gauss(f, lo, hi, order);
  }
  return acc;
}

} // namespace

double omega_cut(double x) {
  if (x <= 0.5) return 1.0;
  if (x >= 1.0) return 0.0;
  const double up = bump_exp(1.0 - x);
  const double down = bump_exp(x - 0.5);
  return up / (up + down);
}

double phi_partition(double x) { return omega_cut(x) - omega_cut(2.0 * x); }

GreensKernel::GreensKernel(int d, double a) : d_(d), a_(a) {
  if (d < 1 || d > 3) throw ConfigError("greens: dimension must be 1, 2 or 3");
  if (!(a >= 1.0)) throw ConfigError("greens: mass a must be >= 1");
  sqrt_a_ = std::sqrt(a);
  // smallest n with 2^-n <= 1/sqrt(a), i.e. 4^n >= a
  int n = 0;
  double p = 1.0;
  while (p < a_) {
    p *= 4.0;
    ++n;
  }
  n_a_ = n;
}

double GreensKernel::eval_radial(double r) const {
  switch (d_) {
    case 1:
      return std::exp(-sqrt_a_ * r) / (2.0 * sqrt_a_);
    case 2:
      if (!(r > 0.0)) throw SingularPoint("P^(a) is singular at x = 0 for d = 2");
      return bessel_k0(sqrt_a_ * r) / (2.0 * M_PI);
    default:
      if (!(r > 0.0)) throw SingularPoint("P^(a) is singular at x = 0 for d = 3");
      return std::exp(-sqrt_a_ * r) / (4.0 * M_PI * r);
  }
}

double GreensKernel::eval(const double* x) const {
  return eval_radial(norm2(x, d_));
}

DyadicDecomposition::DyadicDecomposition(const GreensKernel& kernel, int r,
                                         int n_levels)
    : kernel_(kernel), r_(r), n_levels_(n_levels) {
  if (r < 2) throw ConfigError("decompose: annihilation order r must be >= 2");
  const int d = kernel_.d();

  // moments of the correction bump over R^d; the eta polynomials have no
  // constant term so that eta(0) = 0, keeping the layer corrections from
  // shifting the renormalisation constants at order one
  auto m = [&](int q) {
    return radial_integral(
        d, [&](double rr) { return std::pow(rr, q) * w_bump(rr); }, 0.5, 2048);
  };
  const double m2 = m(2), m4 = m(4), m6 = m(6);
  const double det = m2 * m6 - m4 * m4;
  eta0_beta_ = m6 / det;
  eta0_gamma_ = -m4 / det;
  etaq_beta_ = -d * m4 / det;
  etaq_gamma_ = d * m2 / det;

  // d = 2 taper integral at full depth (constant below the taper zone)
  if (d == 2) {
    const double sa = kernel_.sqrt_a();
    const int na = kernel_.cutoff_index();
    e0_ = composite_gauss(
        [&](double s) {
          return sa * bessel_k1(sa * s) * (1.0 - omega_cut(pow2(na) * s));
        },
        pow2(-na - 1), pow2(-na), 16, 16);
  }

  // moment coefficients I_{0,n}, I_{2e_i,n} for n_a <= n <= n_a + n_levels
  const int na = kernel_.cutoff_index();
  i0_.resize(n_levels_ + 1);
  i2_.resize(n_levels_ + 1);
  for (int j = 0; j <= n_levels_; ++j) {
    const int n = na + j;
    if (d == 1 && n > na) {
      i0_[j] = 0.0;
      i2_[j] = 0.0;
      continue;
    }
    const double top = pow2(-n);
    if (d == 2) {
      const double sa = kernel_.sqrt_a();
      // s^2 K1(sa s) -> s/sa as s -> 0, so the integrands vanish at 0
      auto base = [&](double s) {
        return s <= 0.0 ? 0.0 : sa * bessel_k1(sa * s) * omega_cut(pow2(n) * s);
      };
      i0_[j] = integrate_adaptive([&](double s) { return base(s) * 0.5 * s * s; },
                                  0.0, top, 1e-16, 1e-12)
                   .value;
      i2_[j] = 0.5 * integrate_adaptive(
                         [&](double s) { return base(s) * 0.25 * s * s * s * s; },
                         0.0, top, 1e-18, 1e-12)
                         .value;
    } else {
      // d = 1 or 3: tail sum is omega(2^n r) P(r)
      auto f0 = [&](double rr) {
        return rr == 0.0 && d >= 2
                   ? 0.0
                   : omega_cut(pow2(n) * rr) * kernel_.eval_radial(rr);
      };
      i0_[j] = radial_integral(d, f0, top, 8192);
      i2_[j] = radial_integral(
                   d, [&](double rr) { return rr * rr * f0(rr); }, top, 8192) /
               d;
    }
  }
}

double DyadicDecomposition::i0(int n) const {
  const int j = n - n_a();
  return j >= 0 && j < static_cast<int>(i0_.size()) ? i0_[j] : 0.0;
}

double DyadicDecomposition::i2(int n) const {
  const int j = n - n_a();
  return j >= 0 && j < static_cast<int>(i2_.size()) ? i2_[j] : 0.0;
}

double DyadicDecomposition::eta0_scaled(int n, double rr) const {
  const double u = pow2(n) * rr;
  if (u >= 0.5) return 0.0;
  const double u2 = u * u;
  const double scale = std::pow(pow2(n), kernel_.d());
  return scale * (eta0_beta_ * u2 + eta0_gamma_ * u2 * u2) * w_bump(u);
}

double DyadicDecomposition::etaq_scaled(int n, double rr) const {
  const double u = pow2(n) * rr;
  if (u >= 0.5) return 0.0;
  const double u2 = u * u;
  const double scale = std::pow(pow2(n), kernel_.d() + 2);
  return scale * (etaq_beta_ * u2 + etaq_gamma_ * u2 * u2) * w_bump(u);
}

double DyadicDecomposition::tail_sum_radial(int n, double rr) const {
  const int d = kernel_.d();
  const double top = pow2(-n);
  if (rr >= top) return 0.0;
  if (d == 1) {
    if (n > n_a()) return 0.0;
    return omega_cut(pow2(n_a()) * rr) * kernel_.eval_radial(rr);
  }
  if (d == 3) {
    if (rr == 0.0) return 0.0; // times the diverging P, but callers weight by r^2
    return omega_cut(pow2(n) * rr) * kernel_.eval_radial(rr);
  }
  // d = 2: (1/2pi) int_r^{2^-n} sqrt(a) K1(sqrt(a) s) omega(2^n s) ds
  const double sa = kernel_.sqrt_a();
  const double lo_taper = pow2(-n - 1);
  double taper = 0.0;
  if (n == n_a() && rr <= lo_taper) {
    taper = e0_;
  } else {
    taper = composite_gauss(
        [&](double s) {
          return sa * bessel_k1(sa * s) * (1.0 - omega_cut(pow2(n) * s));
        },
        std::max(rr, lo_taper), top);
  }
  const double full = bessel_k0(sa * rr) - bessel_k0(sa * top);
  return (full - taper) / (2.0 * M_PI);
}

double DyadicDecomposition::layer_base_radial(int n, double rr) const {
  const int d = kernel_.d();
  const double top = pow2(-n);
  if (rr >= top) return 0.0;
  if (d == 1) return n == n_a() ? omega_cut(pow2(n) * rr) * kernel_.eval_radial(rr) : 0.0;
  if (d == 3) {
    const double p = phi_partition(pow2(n) * rr);
    return p == 0.0 ? 0.0 : p * kernel_.eval_radial(rr);
  }
  const double sa = kernel_.sqrt_a();
  const double lo = std::max(rr, pow2(-n - 2));
  if (lo >= top) return 0.0;
  return composite_gauss(
             [&](double s) {
               return sa * bessel_k1(sa * s) * phi_partition(pow2(n) * s);
             },
             lo, top) /
         (2.0 * M_PI);
}

double DyadicDecomposition::layer_radial(int n, double rr) const {
  if (n < n_a() || n > max_level())
    throw ConfigError("decompose: layer index out of range");
  double v = layer_base_radial(n, rr);
  v += i0(n + 1) * eta0_scaled(n + 1, rr) - i0(n) * eta0_scaled(n, rr);
  v += i2(n + 1) * etaq_scaled(n + 1, rr) - i2(n) * etaq_scaled(n, rr);
  return v;
}

double DyadicDecomposition::layer(int n, const double* x) const {
  return layer_radial(n, norm2(x, kernel_.d()));
}

double DyadicDecomposition::remainder_radial(double rr) const {
  const int d = kernel_.d();
  const int na = n_a();
  double base;
  if (d == 2) {
    // P - tail cancels the K0(sqrt(a) r) singularity exactly
    if (rr < pow2(-na)) {
      double taper = e0_;
      if (rr > pow2(-na - 1)) {
        const double sa = kernel_.sqrt_a();
        taper = composite_gauss(
            [&](double s) {
              return sa * bessel_k1(sa * s) * (1.0 - omega_cut(pow2(na) * s));
            },
            rr, pow2(-na));
      }
      base = (bessel_k0(kernel_.sqrt_a() * pow2(-na)) + taper) / (2.0 * M_PI);
    } else {
      base = kernel_.eval_radial(rr);
    }
  } else {
    const double om = omega_cut(pow2(na) * rr);
    base = om >= 1.0 ? 0.0 : (1.0 - om) * kernel_.eval_radial(rr);
  }
  return base + i0(na) * eta0_scaled(na, rr) + i2(na) * etaq_scaled(na, rr);
}

double DyadicDecomposition::remainder(const double* x) const {
  return remainder_radial(norm2(x, kernel_.d()));
}

double DyadicDecomposition::plus_radial(double rr) const {
  const int na = n_a();
  if (rr >= pow2(-na)) return 0.0;
  return tail_sum_radial(na, rr) - i0(na) * eta0_scaled(na, rr) -
         i2(na) * etaq_scaled(na, rr);
}

double DyadicDecomposition::moment_coeff(const std::array<int, 3>& k,
                                         int n) const {
  const int d = kernel_.d();
  int total = 0;
  bool diag2 = false;
  for (int ax = 0; ax < d; ++ax) {
    total += k[ax];
    if (k[ax] == 2) diag2 = true;
    if (k[ax] % 2 == 1) return 0.0; // odd moments vanish by symmetry
  }
  if (total >= r_) throw ConfigError("moment_coeff: |k| must be < r");
  if (total == 0) return i0(n);
  if (total == 2 && diag2) return i2(n);
  return 0.0; // |k| = 2 mixed even cases cannot occur; others vanish
}

void DyadicDecomposition::build_primitive_table() const {
  const double top = pow2(-n_a());
  const int cells = 16384;
  prim_step_ = top / cells;
  prim_cum_.resize(cells + 1);
  prim_cum_[0] = 0.0;
  auto f = [&](double t) { return t <= 0.0 ? 0.0 : t * plus_radial(t); };
  for (int j = 0; j < cells; ++j)
    prim_cum_[static_cast<std::size_t>(j) + 1] =
        prim_cum_[static_cast<std::size_t>(j)] +
        integrate_gauss(f, j * prim_step_, (j + 1) * prim_step_, 8);
}

double DyadicDecomposition::plus_primitive(double u0, double u1) const {
  std::call_once(prim_once_, [&] { build_primitive_table(); });
  const double top = pow2(-n_a());
  u0 = std::min(std::max(u0, 0.0), top);
  u1 = std::min(std::max(u1, 0.0), top);
  if (u1 <= u0) return 0.0;
  auto f = [&](double t) { return t <= 0.0 ? 0.0 : t * plus_radial(t); };
  const auto cell = [&](double u) {
    return std::min<std::size_t>(prim_cum_.size() - 2,
                                 static_cast<std::size_t>(u / prim_step_));
  };
  const std::size_t j0 = cell(u0), j1 = cell(u1);
  if (j0 == j1) return integrate_gauss(f, u0, u1, 8);
  const double head = integrate_gauss(f, u0, (j0 + 1) * prim_step_, 8);
  const double tail = integrate_gauss(f, j1 * prim_step_, u1, 8);
  return head + (prim_cum_[j1] - prim_cum_[j0 + 1]) + tail;
}

ReflectedKernel::ReflectedKernel(const GreensKernel& kernel, double L, Bc bc,
                                 int truncation, double tail_tol)
    : kernel_(kernel), L_(L), bc_(bc) {
  if (!(L > 0.0)) throw ConfigError("reflected kernel: L must be positive");
  if (truncation > 0) {
    M_ = truncation;
  } else {
    M_ = static_cast<int>(
        std::ceil(1.0 + std::log(1.0 / tail_tol) / (2.0 * L * kernel_.sqrt_a())));
  }
  // bound the dropped reflections: shells q > M at distance >= 2L(q-1)
  tail_bound_ = 0.0;
  if (bc_ == Bc::Dirichlet) {
    const int d = kernel_.d();
    const double sa = kernel_.sqrt_a();
    for (int q = M_ + 1; q < M_ + 2000; ++q) {
      const double shell =
          std::pow(2.0 * q + 1.0, d) - std::pow(2.0 * q - 1.0, d);
      const double r = 2.0 * L_ * (q - 1);
      double pmax;
      if (d == 1)
        pmax = std::exp(-sa * r) / (2.0 * sa);
      else if (d == 2)
        pmax = bessel_k0_scaled(sa * r) * std::exp(-sa * r) / (2.0 * M_PI);
      else
        pmax = std::exp(-sa * r) / (4.0 * M_PI * r);
      const double term = shell * pmax;
      tail_bound_ += term;
      if (term < 1e-300) break;
    }
  }
}

void ReflectedKernel::reflect(const double* y, const int* m, double L, int d,
                              double* out) {
  for (int i = 0; i < d; ++i)
    out[i] = (m[i] % 2 == 0 ? y[i] : -y[i]) + 2.0 * L * m[i];
}

int ReflectedKernel::reflection_sign(const int* m, int d) {
  int s = 0;
  for (int i = 0; i < d; ++i) s += std::abs(m[i]);
  return s % 2 == 0 ? 1 : -1;
}

double ReflectedKernel::eval(const double* x, const double* y) const {
  const int d = kernel_.d();
  double diff[3];
  if (bc_ == Bc::Periodic) {
    for (int i = 0; i < d; ++i) diff[i] = x[i] - y[i];
    return kernel_.eval(diff);
  }
  double acc = 0.0;
  int m[3] = {0, 0, 0};
  const int w = 2 * M_ + 1;
  std::int64_t total = 1;
  for (int i = 0; i < d; ++i) total *= w;
  double ym[3];
  for (std::int64_t flat = 0; flat < total; ++flat) {
    std::int64_t rem = flat;
    for (int i = d - 1; i >= 0; --i) {
      m[i] = static_cast<int>(rem % w) - M_;
      rem /= w;
    }
    reflect(y, m, L_, d, ym);
    double r2 = 0.0;
    for (int i = 0; i < d; ++i) r2 += (x[i] - ym[i]) * (x[i] - ym[i]);
    const double r = std::sqrt(r2);
    if (d >= 2 && r == 0.0)
      throw SingularPoint("K^(a) evaluated on the diagonal");
    acc += reflection_sign(m, d) * kernel_.eval_radial(r);
  }
  return acc;
}

double ReflectedKernel::chi_cutoff(int n, const double* y) const {
  const double sn = pow2(-n);
  double prod = 1.0;
  for (int i = 0; i < kernel_.d(); ++i) {
    const double t = std::abs(y[i]);
    if (t >= L_ + 2.0 * sn) return 0.0;
    if (t > L_ + sn) prod *= omega_cut(0.5 * (1.0 + (t - L_ - sn) / sn));
  }
  return prod;
}

double ReflectedKernel::layer_eval(const DyadicDecomposition& dec, int n,
                                   const double* x, const double* y) const {
  const int d = kernel_.d();
  const double cut = chi_cutoff(n, y);
  if (cut == 0.0) return 0.0;
  double diff[3];
  if (bc_ == Bc::Periodic) {
    for (int i = 0; i < d; ++i) diff[i] = x[i] - y[i];
    return cut * dec.layer(n, diff);
  }
  double acc = 0.0;
  int m[3] = {0, 0, 0};
  double ym[3];
  const std::int64_t total = d == 1 ? 3 : (d == 2 ? 9 : 27);
  for (std::int64_t flat = 0; flat < total; ++flat) {
    std::int64_t rem = flat;
    for (int i = d - 1; i >= 0; --i) {
      m[i] = static_cast<int>(rem % 3) - 1;
      rem /= 3;
    }
    reflect(y, m, L_, d, ym);
    for (int i = 0; i < d; ++i) diff[i] = x[i] - ym[i];
    const double rr = norm2(diff, d);
    if (rr >= pow2(-n)) continue;
    acc += reflection_sign(m, d) * dec.layer_radial(n, rr);
  }
  return cut * acc;
}

double boundary_distance(const double* x, int d, double L, double a) {
  double dist = 1e300;
  for (int i = 0; i < d; ++i) dist = std::min(dist, L - std::abs(x[i]));
  return std::min(1.0 / std::sqrt(a), std::max(dist, 0.0));
}

BoundaryDecayReport boundary_decay_check(const ReflectedKernel& refl,
                                         const DyadicDecomposition& dec, int n,
                                         int n_distances, int sup_samples) {
  BoundaryDecayReport rep;
  if (refl.bc() != Bc::Dirichlet) return rep; // Lemma is Dirichlet-specific
  rep.applicable = true;
  const int d = refl.kernel().d();
  const double L = refl.L();
  const double sn = pow2(-n);

  // As |x|_P -> 0 the kernel is a difference of a radial profile at two
  // centers (x and its mirror image), so the sup localizes on the line
  // through the centers: a fine scan along the face normal estimates it,
  // backed by a coarse full-dimensional grid.
  auto sup_over_y = [&](const double* x) {
    double sup = 0.0;
    double y[3];
    for (int i = 1; i < d; ++i) y[i] = x[i];
    const double mirror = 2.0 * L - x[0];
    const double lo = std::min(x[0], mirror) - 1.05 * sn;
    const double hi = std::max(x[0], mirror) + 1.05 * sn;
    const int fine = 24000;
    for (int i = 0; i <= fine; ++i) {
      y[0] = lo + (hi - lo) * i / fine;
      sup = std::max(sup, std::abs(refl.layer_eval(dec, n, x, y)));
    }
    if (d > 1) {
      const int per_axis = std::max(3, static_cast<int>(std::round(
                                           std::pow(sup_samples, 1.0 / d))));
      std::int64_t total = 1;
      for (int i = 0; i < d; ++i) total *= per_axis;
      for (int center = 0; center < 2; ++center) {
        const double c0 = center == 0 ? x[0] : mirror;
        for (std::int64_t flat = 0; flat < total; ++flat) {
          std::int64_t rem = flat;
          for (int i = d - 1; i >= 0; --i) {
            const int idx = static_cast<int>(rem % per_axis);
            rem /= per_axis;
            const double center_i = i == 0 ? c0 : x[i];
            y[i] = center_i + sn * (2.0 * idx / (per_axis - 1) - 1.0);
          }
          sup = std::max(sup, std::abs(refl.layer_eval(dec, n, x, y)));
        }
      }
    }
    return sup;
  };

  double x[3] = {0.0, 0.0, 0.0};
  for (int i = 1; i < d; ++i) x[i] = -0.1237 * L; // generic off-axis point
  const double scale = std::pow(sn, 1.0 - d); // 2^{-n(1-d)}

  // probe deep inside the overlap regime |x|_P << 2^-n where the image
  // cancellation is linear in the distance
  double prev_sup = -1.0;
  for (int j = 0; j < n_distances; ++j) {
    const double dist = 0.012 * sn / pow2(j);
    x[0] = L - dist;
    const double sup = sup_over_y(x);
    rep.ratios.push_back(sup / (scale * dist));
    if (prev_sup > 0.0) rep.halving_ratios.push_back(sup / prev_sup);
    prev_sup = sup;
  }
  x[0] = L;
  rep.boundary_sup = sup_over_y(x);
  rep.levels_checked = 1;
  rep.slope = rep.ratios.back(); // smallest distance, least curvature
  rep.ratio_min = *std::min_element(rep.ratios.begin(), rep.ratios.end());
  rep.ratio_max = *std::max_element(rep.ratios.begin(), rep.ratios.end());
  return rep;
}

void export_kernel_csv(const DyadicDecomposition& dec, const std::string& path,
                       int samples_per_layer) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path + " for writing");
  os << "# anderson-csv v1 kernel\n";
  os << "radius,value,layer\n";
  char buf[128];
  const int na = dec.n_a();
  const double top = pow2(-na);
  auto row = [&](double rr, double v, int layer) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", rr, v, layer);
    os << buf;
  };
  for (int i = 1; i <= samples_per_layer; ++i) {
    const double rr = 2.0 * top * i / samples_per_layer;
    row(rr, dec.kernel().eval_radial(rr), -1);
    row(rr, dec.remainder_radial(rr), -2);
  }
  for (int n = na; n <= std::min(dec.max_level(), na + 8); ++n) {
    for (int i = 1; i <= samples_per_layer; ++i) {
      const double rr = pow2(-n) * i / samples_per_layer;
      row(rr, dec.layer_radial(n, rr), n);
    }
  }
}

} // namespace anderson
