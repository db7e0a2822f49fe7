#include "anderson/mollifier.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace anderson {

double sphere_area(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return 2.0 * M_PI;
    default: return 4.0 * M_PI;
  }
}

double radial_integral(int d, const std::function<double(double)>& f,
                       double rmax, int panels) {
  // composite Simpson; integrand f(r) r^{d-1} is smooth for the profiles
  // used here
  const double h = rmax / panels;
  double sum = 0.0;
  auto g = [&](double r) {
    return f(r) * (d == 1 ? 1.0 : (d == 2 ? r : r * r));
  };
  for (int i = 0; i < panels; ++i) {
    const double a = i * h;
    sum += (g(a) + 4.0 * g(a + 0.5 * h) + g(a + h)) * (h / 6.0);
  }
  return sphere_area(d) * sum;
}

const MollifierProfile& MollifierProfile::standard_bump() {
  static const MollifierProfile p{
      "standard_bump", [](double r) {
        const double r2 = r * r;
        return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0;
      }};
  return p;
}

const MollifierProfile& MollifierProfile::sharp_bump() {
  static const MollifierProfile p{
      "sharp_bump", [](double r) {
        const double r2 = r * r;
        const double q = 1.0 - r2;
        return r2 < 1.0 ? std::exp(-1.0 / (q * q)) : 0.0;
      }};
  return p;
}

const MollifierProfile& MollifierProfile::by_name(const std::string& name) {
  if (name == "standard_bump" || name == "standard") return standard_bump();
  if (name == "sharp_bump" || name == "sharp") return sharp_bump();
  throw ConfigError("unknown mollifier profile '" + name +
                    "' (valid: standard_bump, sharp_bump)");
}

namespace {

double profile_norm(int d, const MollifierProfile& p) {
  static std::map<std::pair<std::string, int>, double> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_pair(p.name, d);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  const double integral = radial_integral(d, p.shape, 1.0);
  const double norm = 1.0 / integral;
  cache[key] = norm;
  return norm;
}

} // namespace

Mollifier::Mollifier(int d, double epsilon, const MollifierProfile& profile)
    : d_(d), eps_(epsilon), profile_(profile) {
  if (d < 1 || d > 3) throw ConfigError("mollifier: dimension must be 1, 2 or 3");
  if (!(epsilon > 0.0)) throw ConfigError("mollifier: epsilon must be positive");
  norm_ = profile_norm(d, profile_);
}

double Mollifier::unit_density(double r) const {
  return norm_ * profile_.shape(std::abs(r));
}

double Mollifier::density(double r) const {
  const double s = std::pow(eps_, -d_);
  return s * unit_density(std::abs(r) / eps_);
}

double Mollifier::DiscreteKernel::weight(const std::array<int, 3>& off) const {
  const int w = 2 * radius + 1;
  std::int64_t flat = 0;
  for (int ax = 0; ax < d; ++ax) flat = flat * w + (off[ax] + radius);
  return weights[static_cast<std::size_t>(flat)];
}

Mollifier::DiscreteKernel Mollifier::discretize(const Grid& grid) const {
  if (grid.d != d_) throw GridMismatch("mollifier/grid dimension mismatch");
  const double h = grid.h();
  if (eps_ < 2.0 * h)
    throw UnresolvedMollifier("mollifier scale eps=" + std::to_string(eps_) +
                              " below 2h=" + std::to_string(2.0 * h));
  DiscreteKernel k;
  k.d = d_;
  k.h = h;
  k.radius = static_cast<int>(std::floor(eps_ / h));
  const int w = 2 * k.radius + 1;
  std::int64_t total = 1;
  for (int ax = 0; ax < d_; ++ax) total *= w;
  k.weights.assign(static_cast<std::size_t>(total), 0.0);
  double mass = 0.0;
  for (std::int64_t flat = 0; flat < total; ++flat) {
    std::int64_t rem = flat;
    double r2 = 0.0;
    for (int ax = d_ - 1; ax >= 0; --ax) {
      const int off = static_cast<int>(rem % w) - k.radius;
      rem /= w;
      r2 += static_cast<double>(off) * off;
    }
    const double r = h * std::sqrt(r2);
    const double v = density(r);
    k.weights[static_cast<std::size_t>(flat)] = v;
    mass += v;
  }
  // renormalize so the discrete mass sum(w) * h^d is exactly 1
  const double hd = std::pow(h, d_);
  const double scale = 1.0 / (mass * hd);
  for (double& v : k.weights) v *= scale;
  return k;
}

} // namespace anderson
