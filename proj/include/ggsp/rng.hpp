// Deterministic random streams. All draws go through hand-rolled transforms
// (never std::*_distribution, whose algorithms are implementation-defined),
// so identical seeds reproduce identical realizations bit for bit.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ggsp {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(splitmix64(seed)) {}

  // Independent substream; derivation depends only on the constructor seed,
  // not on how many draws this stream has produced.
  Rng derive(std::uint64_t stream) const {
    return Rng(splitmix64(seed_ ^ splitmix64(stream + 0x51'7c'c1'b7'27'22'0a'95ULL)));
  }

  // Uniform on [0,1), 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1]; safe under log().
  double uniform_pos() { return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53; }

  // Standard normal via Box-Muller.
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_int(std::uint64_t n) {
    // Rejection sampling over the top bits to avoid modulo bias.
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
    std::uint64_t draw;
    do {
      draw = gen_();
    } while (draw >= limit);
    return draw % n;
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace ggsp
