#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rdbcd {

/// Finalizer of the splitmix64 generator.
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of the replicate's private stream: the (index+1)-th output of a
/// splitmix64 sequence started at master_seed. This derivation is part of
/// the reproducibility contract; changing it changes every simulation.
inline std::uint64_t replicate_seed(std::uint64_t master_seed, std::uint64_t replicate_index) {
  constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
  return splitmix64_mix(master_seed + (replicate_index + 1) * kGamma);
}

/// mt19937_64 with explicit distribution transforms, so draws are identical
/// across standard-library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform on [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Standard normal via the Marsaglia polar method (spare value cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace rdbcd
