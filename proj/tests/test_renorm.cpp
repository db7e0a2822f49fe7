#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "anderson/renorm.hpp"

using namespace anderson;

namespace {
const MollifierProfile& prof() { return MollifierProfile::standard_bump(); }

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}
} // namespace

TEST_CASE("mollifier square has unit mass and compact support") {
  for (int d : {1, 2, 3}) {
    const auto& s2 = MollifierSquare::get(d, prof());
    const double mass = radial_integral(
        d, [&](double r) { return s2(r); }, 2.0, 8192);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(s2(2.0) == 0.0);
    CHECK(s2(0.0) > 0.0);
  }
}

TEST_CASE("d=1 constants vanish by convention") {
  const auto rc = renorm_constants(1, 1.0, 0.125, prof());
  CHECK(rc.c1 == 0.0);
  CHECK(rc.total == 0.0);
  double err = 1.0;
  CHECK(compute_c1(1, 4.0, 0.01, prof(), &err) == 0.0);
  CHECK(err == 0.0);
}

TEST_CASE("d=2: slope of c1 against ln(eps) approaches -1/(2 pi)") {
  std::vector<double> lns, c1s;
  for (int k = 4; k <= 9; ++k) {
    const double eps = std::ldexp(1.0, -k);
    lns.push_back(std::log(eps));
    c1s.push_back(compute_c1(2, 1.0, eps, prof()));
  }
  const double slope = fit_slope(lns, c1s);
  const double target = -1.0 / (2.0 * M_PI);
  CHECK(std::abs(slope / target - 1.0) < 0.10);
  // monotone divergence: increments positive and -> ln(2)/(2 pi)
  for (std::size_t i = 1; i < c1s.size(); ++i) CHECK(c1s[i] > c1s[i - 1]);
  const double inc = c1s.back() - c1s[c1s.size() - 2];
  CHECK(inc == doctest::Approx(std::log(2.0) / (2.0 * M_PI)).epsilon(0.05));
}

TEST_CASE("d=2: quadrature agrees with the Monte-Carlo oracle") {
  const double eps = 0.0625;
  double qerr = 0.0;
  const double quad = compute_c1(2, 1.0, eps, prof(), &qerr);
  const auto mc = mc_c1(2, 1.0, eps, prof(), 800000, 4242);
  CHECK(std::abs(quad - mc.value) < 3.0 * (mc.sigma + qerr) + 1e-9);
}

TEST_CASE("d=3: eps * c1 stabilizes and the MC oracle agrees") {
  std::vector<double> scaled;
  for (int k = 4; k <= 8; ++k) {
    const double eps = std::ldexp(1.0, -k);
    scaled.push_back(eps * compute_c1(3, 1.0, eps, prof()));
  }
  for (std::size_t i = 1; i < scaled.size(); ++i)
    CHECK(std::abs(scaled[i] / scaled[i - 1] - 1.0) < 0.10);
  CHECK(scaled.back() > 0.0); // c_rho > 0 for the standard bump

  const double eps = 0.03125;
  double qerr = 0.0;
  const double quad = compute_c1(3, 1.0, eps, prof(), &qerr);
  const auto mc = mc_c1(3, 1.0, eps, prof(), 1500000, 515);
  CHECK(std::abs(quad - mc.value) < 4.0 * (mc.sigma + qerr));
}

TEST_CASE("d=3: c11 log-divergence has stabilizing increments") {
  // the log term (slope ln2/(16 pi^2) per octave) emerges below eps ~ 2^-8
  std::vector<double> c11s;
  for (int k = 8; k <= 11; ++k) {
    const double eps = std::ldexp(1.0, -k);
    auto [c11, c12] = compute_c11_c12(1.0, eps, prof());
    (void)c12;
    c11s.push_back(c11);
  }
  std::vector<double> incs;
  for (std::size_t i = 1; i < c11s.size(); ++i)
    incs.push_back(c11s[i] - c11s[i - 1]);
  for (double inc : incs) CHECK(inc > 0.0); // grows as eps decreases
  // ratio of successive increments -> 1 (log divergence)
  CHECK(std::abs(incs.back() / incs[incs.size() - 2] - 1.0) < 0.20);
  // and the limiting increment is the paper's coefficient times ln 2
  CHECK(incs.back() ==
        doctest::Approx(std::log(2.0) / (16.0 * M_PI * M_PI)).epsilon(0.05));
}

TEST_CASE("d=3: c11 and c12 agree with the Monte-Carlo oracles") {
  const double eps = 0.125, a = 1.0;
  double qerr = 0.0;
  auto [c11, c12] = compute_c11_c12(a, eps, prof(), &qerr);
  const auto m11 = mc_c11(a, eps, prof(), 3000000, 99);
  CHECK(std::abs(c11 - m11.value) < 3.0 * (m11.sigma + qerr) + 2e-4);
  const auto m12 = mc_c12(a, eps, prof(), 3000000, 177);
  CHECK(std::abs(c12 - m12.value) < 3.0 * (m12.sigma + qerr) + 2e-4);
}

TEST_CASE("a-Lipschitz bound on the total constants") {
  for (int d : {2, 3}) {
    for (double eps : {0.125, 0.0625}) {
      std::vector<double> as = {1.0, 4.0, 9.0, 16.0};
      std::vector<double> totals;
      for (double a : as)
        totals.push_back(renorm_constants(d, a, eps, prof()).total);
      double kappa = 0.0;
      for (std::size_t i = 0; i < as.size(); ++i)
        for (std::size_t j = i + 1; j < as.size(); ++j)
          kappa = std::max(kappa,
                           std::abs(totals[i] - totals[j]) /
                               std::abs(std::sqrt(as[i]) - std::sqrt(as[j])));
      CHECK(std::isfinite(kappa));
      CHECK(kappa < 10.0); // one modest constant across all pairs
    }
  }
}

TEST_CASE("lattice self-energy: d=1 finite at the resolution floor") {
  Grid grid(1, 1.0, 512, Bc::Periodic);
  Mollifier mol(1, 2.0 * grid.h());
  const double v = lattice_self_energy(grid, 1.0, mol.epsilon(), mol);
  CHECK(std::isfinite(v));
  CHECK(v > 0.0);
  CHECK(v < 1.0); // d=1 kernel is integrable, no divergence
}

TEST_CASE("lattice self-energy: self-convergence under h-refinement") {
  const double eps = 0.25, a = 1.0;
  Mollifier mol(2, eps);
  std::vector<double> vals;
  for (int n : {32, 64, 128}) {
    Grid grid(2, 1.0, n, Bc::Periodic);
    vals.push_back(lattice_self_energy(grid, a, eps, mol));
  }
  const double d1 = std::abs(vals[1] - vals[0]);
  const double d2 = std::abs(vals[2] - vals[1]);
  CHECK(d2 * 2.0 <= d1); // Richardson-style shrink
}

TEST_CASE("scaled constants: identity at L=1 and exact algebra") {
  const auto base = renorm_constants(2, 1.0, 0.0625, prof());
  const auto same = scaled_constants(base, 1.0);
  CHECK(same.total_tilde == doctest::Approx(base.total).epsilon(1e-14));
  CHECK(same.delta_L == doctest::Approx(0.0).epsilon(1e-14));

  const double L = 2.0;
  const auto sc = scaled_constants(base, L);
  const double direct = compute_c1(2, 1.0, 0.0625 * L, prof());
  CHECK(sc.c1_tilde == doctest::Approx(direct / (L * L)).epsilon(1e-13));
}

TEST_CASE("delta_L decreases in L (d=2)") {
  const auto base = renorm_constants(2, 1.0, 0.015625, prof());
  double prev = 1e300;
  for (double L : {2.0, 4.0, 8.0}) {
    const auto sc = scaled_constants(base, L);
    CHECK(sc.delta_L > 0.0);
    CHECK(sc.delta_L < prev);
    prev = sc.delta_L;
  }
}

TEST_CASE("constants csv export") {
  std::vector<RenormConstants> rows;
  rows.push_back(renorm_constants(2, 1.0, 0.125, prof()));
  export_constants_csv(rows, "constants_test.csv");
  std::ifstream is("constants_test.csv");
  std::string line;
  std::getline(is, line);
  CHECK(line == "# anderson-csv v1 renorm-constants");
  std::getline(is, line);
  CHECK(line == "d,a,eps,method,c1,c11,c12,C,error_estimate");
  int rowsn = 0;
  while (std::getline(is, line)) ++rowsn;
  CHECK(rowsn == 1);
  std::filesystem::remove("constants_test.csv");
}

TEST_CASE("constants are cached per key") {
  const auto a1 = renorm_constants(2, 4.0, 0.125, prof());
  const auto a2 = renorm_constants(2, 4.0, 0.125, prof());
  CHECK(a1.c1 == a2.c1); // byte-identical from the cache
}
