#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string_view>

// Deterministic random number generation. Everything in here is specified
// down to the bit: engines are xoshiro256++ / splitmix64, and the
// distributions avoid libm functions whose rounding differs between C
// libraries. Streams derived from the same (seed, tag, indices) tuple
// produce identical sequences on every platform.

namespace greenfed::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// splitmix64 finalizer (Stafford mix13).
inline std::uint64_t mix64(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Stateless counter PRG: the k-th word of the stream identified by `seed`.
inline std::uint64_t splitmix_at(std::uint64_t seed, std::uint64_t k) {
  return mix64(seed + k * kGolden);
}

// Derive an independent stream seed from a base seed, a role tag, and up to
// three indices (round, client, ...). Used to give every consumer its own
// stream so toggling one feature never perturbs another's draws.
inline std::uint64_t derive(std::uint64_t base, std::string_view tag) {
  std::uint64_t h = base;
  for (unsigned char c : tag) h = mix64(h ^ c);
  return h;
}
inline std::uint64_t derive(std::uint64_t base, std::string_view tag, std::uint64_t a) {
  return mix64(derive(base, tag) ^ a);
}
inline std::uint64_t derive(std::uint64_t base, std::string_view tag, std::uint64_t a,
                            std::uint64_t b) {
  return mix64(derive(base, tag, a) ^ b);
}

namespace detmath {

// log/exp evaluated with fixed polynomial arithmetic (fdlibm coefficients).
// Bit-identical on every IEEE-754 platform, unlike std::log/std::exp whose
// last-ulp rounding varies between libm implementations. Accuracy ~1 ulp.

inline double log(double x) {
  static constexpr double ln2_hi = 6.93147180369123816490e-01;
  static constexpr double ln2_lo = 1.90821492927058770002e-10;
  static constexpr double Lg1 = 6.666666666666735130e-01;
  static constexpr double Lg2 = 3.999999999940941908e-01;
  static constexpr double Lg3 = 2.857142874366239149e-01;
  static constexpr double Lg4 = 2.222219843214978396e-01;
  static constexpr double Lg5 = 1.818357216161805012e-01;
  static constexpr double Lg6 = 1.531383769920937332e-01;
  static constexpr double Lg7 = 1.479819860511658591e-01;

  if (std::isnan(x) || x < 0.0) return std::numeric_limits<double>::quiet_NaN();
  if (x == 0.0) return -std::numeric_limits<double>::infinity();
  if (std::isinf(x)) return x;

  int e = 0;
  double m = std::frexp(x, &e);  // m in [0.5, 1)
  if (m < 0.70710678118654752440) {
    m *= 2.0;
    e -= 1;
  }
  const double f = m - 1.0;
  const double hfsq = 0.5 * f * f;
  const double s = f / (2.0 + f);
  const double z = s * s;
  const double w = z * z;
  const double t1 = w * (Lg2 + w * (Lg4 + w * Lg6));
  const double t2 = z * (Lg1 + w * (Lg3 + w * (Lg5 + w * Lg7)));
  const double r = t2 + t1;
  const double dk = static_cast<double>(e);
  return dk * ln2_hi - ((hfsq - (s * (hfsq + r) + dk * ln2_lo)) - f);
}

inline double exp(double x) {
  static constexpr double ln2_hi = 6.93147180369123816490e-01;
  static constexpr double ln2_lo = 1.90821492927058770002e-10;
  static constexpr double inv_ln2 = 1.44269504088896338700e+00;
  static constexpr double P1 = 1.66666666666666019037e-01;
  static constexpr double P2 = -2.77777777770155933842e-03;
  static constexpr double P3 = 6.61375632143793436117e-05;
  static constexpr double P4 = -1.65339022054652515390e-06;
  static constexpr double P5 = 4.13813679705723846039e-08;

  if (std::isnan(x)) return x;
  if (x > 709.782712893383973096) return std::numeric_limits<double>::infinity();
  if (x < -745.13321910194110842) return 0.0;

  int k = 0;
  double hi = 0.0, lo = 0.0;
  if (std::abs(x) > 0.5 * ln2_hi) {
    k = static_cast<int>(inv_ln2 * x + (x > 0 ? 0.5 : -0.5));
    hi = x - k * ln2_hi;
    lo = k * ln2_lo;
  } else {
    hi = x;
  }
  const double r = hi - lo;
  const double t = r * r;
  const double c = r - t * (P1 + t * (P2 + t * (P3 + t * (P4 + t * P5))));
  const double y = 1.0 - ((lo - (r * c) / (2.0 - c)) - hi);
  return std::ldexp(y, k);
}

}  // namespace detmath

// xoshiro256++ with splitmix64 seeding.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) {
      sm += kGolden;
      w = mix64(sm - kGolden);
    }
    has_spare_ = false;
    spare_ = 0.0;
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Unbiased integer in [0, n) via Lemire's multiply-shift rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Xoshiro256::below: n must be positive");
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Standard normal via the Marsaglia polar method (detmath::log keeps the
  // sequence platform-independent). Caches the paired deviate.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0, v = 0.0, s = 0.0;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * detmath::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
  }

  // Gamma(shape, 1) by Marsaglia–Tsang, with the power boost for shape < 1.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("Xoshiro256::gamma: shape must be > 0");
    if (shape < 1.0) {
      double u = uniform01();
      while (u == 0.0) u = uniform01();
      return gamma(shape + 1.0) * detmath::exp(detmath::log(u) / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = 0.0, v = 0.0;
      do {
        x = gaussian();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && detmath::log(u) < 0.5 * x * x + d * (1.0 - v + detmath::log(v))) return d * v;
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t s_[4];
  bool has_spare_;
  double spare_;
};

}  // namespace greenfed::rng
