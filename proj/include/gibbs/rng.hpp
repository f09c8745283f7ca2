#pragma once

#include <cstdint>
#include <random>

namespace gibbs {

// Deterministic RNG: mt19937_64 core with hand-rolled distributions so that
// a fixed seed gives bit-identical streams on every platform and standard
// library. Do not swap in std::*_distribution: those are unspecified.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform on the open interval (0,1).
  double uniform() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::int64_t uniform_int(std::int64_t n);

  double normal();                       // standard, Marsaglia polar
  double exponential() { return -std::log(uniform()); }
  double gamma(double shape);            // unit rate, Marsaglia-Tsang
  double gamma(double shape, double rate) { return gamma(shape) / rate; }
  double beta(double a, double b);

  // Independent substream seed: splitmix64 scramble of (seed, stream).
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gibbs
