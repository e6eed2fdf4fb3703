#pragma once

#include <cstdint>

namespace causalkit {

// Counter-based randomness: every draw is keyed by (seed, row, slot, draw)
// instead of advancing shared generator state.  This keeps simulations
// byte-identical across platforms and lets counterfactual evaluation reuse
// exactly the noise of the factual pass.

// SplitMix64 finalizer; bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives the 64-bit state for one keyed draw.
constexpr std::uint64_t substream(std::uint64_t seed, std::uint64_t a,
                                  std::uint64_t b, std::uint64_t c = 0) {
  std::uint64_t h = mix64(seed ^ 0x5851f42d4c957f2dULL);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  h = mix64(h ^ c);
  return h;
}

// Maps a 64-bit word to the open interval (0, 1); never returns 0 or 1.
constexpr double to_unit_interval(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

inline double keyed_uniform(std::uint64_t seed, std::uint64_t a,
                            std::uint64_t b, std::uint64_t c = 0) {
  return to_unit_interval(substream(seed, a, b, c));
}

// Inverse standard-normal CDF via the AS241-style rational approximation
// (three branches; absolute error well below 1e-9).  Throws kArgument
// outside (0, 1).
double inv_normal_cdf(double p);

// Two-sided critical value: z such that P(|N(0,1)| <= z) = level.
double z_quantile(double level);

inline double keyed_normal(std::uint64_t seed, std::uint64_t a,
                           std::uint64_t b, std::uint64_t c = 0) {
  return inv_normal_cdf(keyed_uniform(seed, a, b, c));
}

}  // namespace causalkit
