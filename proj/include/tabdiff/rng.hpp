#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>

namespace tabdiff {

// Deterministic random stream. Every draw is fully specified here rather
// than delegated to implementation-defined <random> distributions, so a
// given seed reproduces the same sequence on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Child stream keyed on (seed, stream). Independent of the parent's
  // draw position, so per-row streams can be consumed in any order.
  Rng derive(std::uint64_t stream) const { return Rng(mix(seed_, stream)); }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Unbiased uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
    unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t reject_below = (0 - n) % n;
      while (lo < reject_below) {
        m = static_cast<unsigned __int128>(engine_()) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Standard normal via Box-Muller; pairs are cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  void fill_normal(std::span<double> out) {
    for (double& v : out) v = normal();
  }

  // Index drawn from an (unnormalized is not allowed) probability vector.
  std::size_t categorical(std::span<const double> probs) {
    const double u = uniform();
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
      acc += probs[k];
      if (u < acc) return k;
    }
    return probs.size() - 1;
  }

  // splitmix64-style mixer used for stream derivation.
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace tabdiff
