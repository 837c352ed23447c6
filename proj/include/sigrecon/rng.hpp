#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace sigrecon {

/// Philox4x32-10 counter-based generator.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter round(const Counter& c, const Key& k) {
    constexpr std::uint64_t M0 = 0xD2511F53u;
    constexpr std::uint64_t M1 = 0xCD9E8D57u;
    const std::uint64_t p0 = M0 * c[0];
    const std::uint64_t p1 = M1 * c[2];
    return {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
            static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
  }

  static Counter generate(Counter c, Key k) {
    constexpr std::uint32_t W0 = 0x9E3779B9u;
    constexpr std::uint32_t W1 = 0xBB67AE85u;
    for (int r = 0; r < 10; ++r) {
      if (r > 0) {
        k[0] += W0;
        k[1] += W1;
      }
      c = round(c, k);
    }
    return c;
  }
};

/// Uniform in the open interval (0,1) from 53 random bits.
inline double open_uniform(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

/// Standard normals keyed by (seed, replica, step, driver). Each Philox block
/// yields the pair of drivers (2j, 2j+1) by Box-Muller.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint32_t replica)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        replica_(replica) {}

  std::array<double, 2> pair(std::uint64_t step, std::uint32_t j) const {
    const Philox4x32::Counter c{static_cast<std::uint32_t>(step), replica_, j,
                                static_cast<std::uint32_t>(step >> 32)};
    const auto r = Philox4x32::generate(c, key_);
    const double u1 = open_uniform(r[0], r[1]);
    const double u2 = open_uniform(r[2], r[3]);
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    return {rad * std::cos(ang), rad * std::sin(ang)};
  }

  /// Fills out[0..d) with the normals of one step.
  void fill(std::uint64_t step, std::size_t d, double* out) const {
    for (std::size_t a = 0; a < d; a += 2) {
      const auto z = pair(step, static_cast<std::uint32_t>(a / 2));
      out[a] = z[0];
      if (a + 1 < d) out[a + 1] = z[1];
    }
  }

 private:
  Philox4x32::Key key_;
  std::uint32_t replica_;
};

}  // namespace sigrecon
