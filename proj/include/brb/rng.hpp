#pragma once

#include <cassert>
#include <cstdint>
#include <random>
#include <span>

namespace brb {

// SplitMix64 mixing step, used to derive independent substream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic random stream. Every random draw in the library goes through
// one of these. Substreams are derived from a single root seed, so e.g. one
// strategy's internal coin flips cannot perturb another agent's value stream.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  // Index drawn proportionally to nonnegative weights (need not sum to 1).
  int categorical(std::span<const double> weights) {
    assert(!weights.empty());
    double total = 0.0;
    for (double w : weights) total += w;
    const double u = uniform01() * total;
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
      acc += weights[k];
      if (u < acc) return static_cast<int>(k);
    }
    return static_cast<int>(weights.size()) - 1;
  }

 private:
  std::mt19937_64 engine_;
};

enum class StreamPurpose : std::uint64_t {
  Values = 1,
  Winner = 2,
  Strategy = 3,
  Adversary = 4,
  Dmmf = 5,
  Instance = 6,
};

inline RngStream derive_stream(std::uint64_t root, StreamPurpose purpose,
                               std::uint64_t index = 0) {
  const std::uint64_t tag =
      splitmix64(root) ^
      splitmix64(static_cast<std::uint64_t>(purpose) * 0x9e3779b97f4a7c15ULL + 1);
  return RngStream(splitmix64(tag ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

}  // namespace brb
