#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "anderson/bessel.hpp"
#include "anderson/rng.hpp"
#include "oracles.hpp"

using namespace anderson;

TEST_CASE("philox known-answer vectors") {
  std::uint32_t out[4];
  Rng::block(0, 0, 0, 0, 0, 0, out);
  CHECK(out[0] == 0x6627e8d5u);
  CHECK(out[1] == 0xe169c58du);
  CHECK(out[2] == 0xbc57ac4cu);
  CHECK(out[3] == 0x9b00dbd8u);

  Rng::block(0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu,
             0xffffffffu, out);
  CHECK(out[0] == 0x408f276du);
  CHECK(out[1] == 0x41c83b0eu);
  CHECK(out[2] == 0xa20bc7c6u);
  CHECK(out[3] == 0x6d5451fdu);
}

TEST_CASE("rng streams are independent and reproducible") {
  Rng a(42, 0), b(42, 0), c(42, 1);
  bool differ = false;
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    if (va != c.next_u64()) differ = true;
  }
  CHECK(differ);
}

TEST_CASE("gaussian moments") {
  Rng rng(7, 3);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.next_gaussian();
    s += g;
    s2 += g * g;
  }
  CHECK(std::abs(s / n) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(s2 / n - 1.0) < 6.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("K0/K1 against the integral oracle") {
  const double zs[] = {1e-4, 1e-2, 0.1,  0.5, 1.0, 1.9, 2.0, 2.0001,
                       2.1,  2.5,  3.0,  5.0, 8.0, 12., 20., 50.,
                       120., 300., 640., 700.};
  for (double z : zs) {
    const double k0 = bessel_k0(z);
    const double k1 = bessel_k1(z);
    const long double o0 = oracles::bessel_k0_integral(z);
    const long double o1 = oracles::bessel_k1_integral(z);
    CHECK(std::abs(k0 - static_cast<double>(o0)) <=
          1e-12 * static_cast<double>(o0));
    CHECK(std::abs(k1 - static_cast<double>(o1)) <=
          1e-12 * static_cast<double>(o1));
  }
}

TEST_CASE("scaled variants are consistent and stable at large z") {
  for (double z : {1.0, 2.0, 10.0, 100.0, 2000.0, 20000.0}) {
    const double s = bessel_k0_scaled(z);
    CHECK(s > 0.0);
    CHECK(std::isfinite(s));
    if (z <= 600.0) {
      CHECK(std::abs(s * std::exp(-z) - bessel_k0(z)) <= 1e-12 * bessel_k0(z));
    }
    // leading asymptotics sqrt(pi/2z)
    if (z >= 100.0) {
      const double lead = std::sqrt(M_PI / (2.0 * z));
      CHECK(std::abs(s / lead - 1.0) < 0.01);
    }
  }
}

TEST_CASE("small-argument law: K0(z) + ln z bounded") {
  // K0(z) ~ -ln z as z -> 0 (A&S 9.6); the combination stays bounded
  double lo = 1e300, hi = -1e300;
  for (double z = 1e-6; z <= 1e-2; z *= 2.0) {
    const double v = bessel_k0(z) + std::log(z);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(hi < 1.0);
  CHECK(lo > -1.0);
  CHECK(hi - lo < 0.01); // the limit is ln 2 - gamma, approached fast
}
