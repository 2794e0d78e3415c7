#pragma once

// Deterministic RNG with explicit stream splitting. std::normal_distribution
// is implementation-defined, so normals come from our own Box-Muller on top
// of a splitmix64 core; results are bit-identical across platforms and
// independent of evaluation order between streams.

#include <cmath>
#include <cstdint>
#include <cstddef>

namespace musel {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix64(seed + 0x9e3779b97f4a7c15ULL)) {}

  // Independent stream for (base seed, replication index, role). Roles keep
  // design / noise / perturbation draws decoupled so adding a draw to one
  // generator never shifts another.
  Rng(std::uint64_t base_seed, std::uint64_t rep, std::uint64_t role)
      : state_(mix64(mix64(base_seed + 0x9e3779b97f4a7c15ULL) + rep * 0xd1342543de82ef95ULL +
                     role * 0xaf251af3b0f025b5ULL + 1)) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on [a, b).
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  bool bernoulli(double prob) { return uniform() < prob; }

  // Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace musel
