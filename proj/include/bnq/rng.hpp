#pragma once
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace bnq {

// splitmix64 finalizer; used to derive well-separated seeds from (base, stream).
inline uint64_t mix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t base, uint64_t stream) {
  return mix64(base ^ mix64(stream));
}

// Deterministic RNG. mt19937_64 output is pinned by the standard; all
// distributions are hand-rolled on top of it so results are reproducible
// across standard libraries (std:: distributions are not).
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // uniform in (0, 1]
  double uniform_pos() {
    return static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53;
  }

  // unbiased integer in [0, n)
  uint32_t below(uint32_t n) {
    uint64_t threshold = (~uint64_t{0} - n + 1) % n;  // 2^64 mod n
    for (;;) {
      uint64_t x = eng_();
      if (x >= threshold) return static_cast<uint32_t>(x % n);
    }
  }

  // standard normal, Box-Muller (cosine branch only)
  double normal() {
    double u1 = uniform_pos();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Gamma(alpha, 1), Marsaglia-Tsang; alpha < 1 boosted via u^(1/alpha)
  double gamma(double alpha) {
    if (alpha < 1.0) {
      double u = uniform_pos();
      return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
    }
    double d = alpha - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // symmetric Dirichlet(alpha) over k categories
  std::vector<double> dirichlet(double alpha, int k) {
    std::vector<double> g(k);
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
      g[i] = gamma(alpha);
      sum += g[i];
    }
    for (int i = 0; i < k; ++i) g[i] /= sum;
    return g;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace bnq
