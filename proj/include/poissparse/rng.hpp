#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>

namespace psr {

// SplitMix64 step; used for seeding and for hashing seed paths.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives a child seed from a master seed and a path of stream indices.
// Order matters; derive_seed(s, {a, b}) != derive_seed(s, {b, a}).
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = master;
  splitmix64(s);
  for (std::uint64_t x : path) {
    s ^= x + 0x9e3779b97f4a7c15ULL;
    splitmix64(s);
  }
  std::uint64_t t = s;
  return splitmix64(t);
}

// xoshiro256** with exact integer-valued distributions layered on top.
// Streams are derived from (seed, stream) pairs so that trial t of a Monte
// Carlo loop sees the same draws regardless of execution order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  static Rng substream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(derive_seed(seed, {stream}));
  }

  std::uint64_t next_u64() {
    auto rotl = [](std::uint64_t x, int k) {
      return (x << k) | (x >> (64 - k));
    };
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1).
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1].
  double uniform_oc() { return double((next_u64() >> 11) + 1) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal (Box-Muller, pair cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform_oc();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mu, double sigma) { return mu + sigma * normal(); }

  // Gamma(shape, 1) via Marsaglia-Tsang.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be > 0");
    if (shape < 1.0) {
      double u = uniform_oc();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      double u = uniform_oc();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
  }

  double beta(double alpha, double beta_param) {
    double x = gamma(alpha);
    double y = gamma(beta_param);
    return x / (x + y);
  }

  // Exact Poisson sampling for all rate magnitudes: product-of-uniforms
  // inversion for small rates, Hormann's PTRS transformed rejection for
  // large ones. A Gaussian approximation is never used.
  long long poisson(double rate) {
    if (rate < 0.0 || !std::isfinite(rate))
      throw std::domain_error("poisson: rate must be finite and >= 0");
    if (rate == 0.0) return 0;
    if (rate < 10.0) return poisson_small(rate);
    return poisson_ptrs(rate);
  }

 private:
  long long poisson_small(double rate) {
    const double limit = std::exp(-rate);
    long long k = 0;
    double prod = uniform_oc();
    while (prod > limit) {
      prod *= uniform_oc();
      ++k;
    }
    return k;
  }

  long long poisson_ptrs(double rate) {
    const double slam = std::sqrt(rate);
    const double llam = std::log(rate);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      double u = uniform() - 0.5;
      double v = uniform_oc();
      double us = 0.5 - std::fabs(u);
      double kd = std::floor((2.0 * a / us + b) * u + rate + 0.43);
      if (us >= 0.07 && v <= vr) return (long long)kd;
      if (kd < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
          kd * llam - rate - std::lgamma(kd + 1.0)) {
        return (long long)kd;
      }
    }
  }

  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace psr
