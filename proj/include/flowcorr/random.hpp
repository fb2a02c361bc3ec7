#pragma once

#include <cstdint>
#include <random>

namespace flowcorr {

/// SplitMix64 finalizer. Used to derive independent per-trial streams.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stream seed for (master, index, salt). Distinct salts give unrelated
/// streams for the same trial (creator flow, H0 flow, watermark key, ...).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                    std::uint64_t salt = 0) noexcept {
  return mix64(mix64(master ^ mix64(index)) + salt);
}

/// Single-owner random state. Not shared between threads.
class Rng {
public:
  using engine_type = std::mt19937_64;

  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  engine_type& engine() noexcept { return engine_; }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    for (;;) {
      const double u = std::generate_canonical<double, 53>(engine_);
      if (u > 0.0) return u;
    }
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() { return normal_(engine_); }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    std::poisson_distribution<std::uint64_t> dist(mean);
    return dist(engine_);
  }

  /// Uniform index in [0, n).
  std::uint64_t index(std::uint64_t n) {
    std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
    return dist(engine_);
  }

private:
  engine_type engine_;
  std::uint64_t seed_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace flowcorr
