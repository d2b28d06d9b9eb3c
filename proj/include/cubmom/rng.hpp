#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cubmom {

// splitmix64 step; used to decorrelate substreams derived from one user seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seeded generator with explicit bit-level distributions, so that traces
/// are reproducible independently of the standard library's distribution
/// implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t s = seed ^ (0xA3C59AC2ULL + stream * 0x9E3779B97F4A7C15ULL);
    gen_.seed(splitmix64(s));
  }

  std::uint64_t next() { return gen_(); }

  // uniform in [0, 1)
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform integer in {0, ..., n-1}
  std::int64_t below(std::int64_t n) {
    auto k = static_cast<std::int64_t>(uniform01() * static_cast<double>(n));
    return k >= n ? n - 1 : k;
  }

  // standard normal via Box-Muller
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cubmom
