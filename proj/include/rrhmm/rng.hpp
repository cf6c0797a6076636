#pragma once

#include <cstdint>
#include <span>

namespace rrhmm {

//! Counter-based generator: draw i is splitmix64(seed + i * golden gamma).
//! The output stream is a pure function of (seed, counter), so it is identical
//! across platforms and standard libraries.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = seed_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  //! Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  //! Standard normal via Box-Muller (one value per call, two uniforms).
  double normal();

  std::uint64_t counter() const { return counter_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

//! Inverse-CDF draw against a cumulative distribution; the first index whose
//! cumulative value exceeds u wins, so ties go to the lower index.
int sample_from_cumulative(std::span<const double> cumulative, double u);

//! Seed for an independent stream derived from a base seed and a cell index.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace rrhmm
