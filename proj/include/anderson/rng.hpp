#ifndef ANDERSON_RNG_HPP
#define ANDERSON_RNG_HPP

#include <cmath>
#include <cstdint>

namespace anderson {

// Counter-based generator (Philox4x32-10). A stream is addressed by
// (seed, stream): replica k draws from stream k and is reproducible in
// isolation, independent of how many other replicas run or in what order.
class Rng {
public:
  Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : key0_(static_cast<std::uint32_t>(seed)),
        key1_(static_cast<std::uint32_t>(seed >> 32)),
        ctr2_(static_cast<std::uint32_t>(stream)),
        ctr3_(static_cast<std::uint32_t>(stream >> 32)) {}

  std::uint32_t next_u32() {
    if (have_ == 0) {
      block(ctr0_, ctr1_, ctr2_, ctr3_, key0_, key1_, out_);
      if (++ctr0_ == 0) ++ctr1_;
      have_ = 4;
    }
    return out_[4 - have_--];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // uniform in [0,1)
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // standard normal, Box-Muller pairwise
  double next_gaussian() {
    if (have_gauss_) {
      have_gauss_ = false;
      return gauss_;
    }
    double u1 = next_double();
    // open interval at 0 so the log below is finite
    while (u1 <= 0.0) u1 = next_double();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 6.283185307179586476925286766559 * u2;
    gauss_ = r * std::sin(t);
    have_gauss_ = true;
    return r * std::cos(t);
  }

  // one full Philox4x32-10 block, exposed for known-answer tests
  static void block(std::uint32_t c0, std::uint32_t c1, std::uint32_t c2,
                    std::uint32_t c3, std::uint32_t k0, std::uint32_t k1,
                    std::uint32_t out[4]) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = 0xD2511F53ull * c0;
      const std::uint64_t p1 = 0xCD9E8D57ull * c2;
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      const std::uint32_t n0 = hi1 ^ c1 ^ k0;
      const std::uint32_t n1 = lo1;
      const std::uint32_t n2 = hi0 ^ c3 ^ k1;
      const std::uint32_t n3 = lo0;
      c0 = n0;
      c1 = n1;
      c2 = n2;
      c3 = n3;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    out[0] = c0;
    out[1] = c1;
    out[2] = c2;
    out[3] = c3;
  }

private:
  std::uint32_t key0_, key1_;
  std::uint32_t ctr0_ = 0, ctr1_ = 0, ctr2_, ctr3_;
  std::uint32_t out_[4] = {0, 0, 0, 0};
  int have_ = 0;
  bool have_gauss_ = false;
  double gauss_ = 0.0;
};

} // namespace anderson

#endif
