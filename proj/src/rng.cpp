#include "rrhmm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rrhmm {

double CounterRng::normal() {
  double u1 = uniform();
  const double u2 = uniform();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int sample_from_cumulative(std::span<const double> cumulative, double u) {
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end()) {
    // u beyond the rounded total mass: fall back to the last index with mass.
    for (std::size_t i = cumulative.size(); i-- > 0;)
      if (i == 0 || cumulative[i] > cumulative[i - 1]) return static_cast<int>(i);
    return 0;
  }
  return static_cast<int>(it - cumulative.begin());
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  CounterRng mix(base ^ (stream * 0xD1B54A32D192ED03ULL + 0x2545F4914F6CDD1DULL));
  return mix.next_u64();
}

}  // namespace rrhmm
