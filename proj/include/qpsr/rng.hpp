#pragma once

#include <cmath>
#include <cstdint>

namespace qpsr {

// splitmix64 finalizer. Stateless, portable, and good enough avalanche for
// seed derivation and sampling streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a base seed and up to three
// indices. The chaining is order sensitive, so (a,b) and (b,a) differ.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t x = splitmix64(seed ^ 0x6a09e667f3bcc909ULL);
  x = splitmix64(x ^ a);
  x = splitmix64(x ^ b);
  x = splitmix64(x ^ c);
  return x;
}

// Minimal deterministic PRNG stream (splitmix64 sequence). Results do not
// depend on the platform's std::uniform_real_distribution.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller. Two uniforms per draw, no cached spare.
  double gaussian() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace qpsr
