#pragma once

#include <cmath>
#include <cstdint>

namespace pairsim {

/// splitmix64 step: advance state by the golden-gamma constant and mix.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Child seed for stream `stream` of a parent seed: the stream-th output of
/// the parent splitmix64 sequence, computed in O(1). Replicate r of any
/// fan-out (Monte Carlo replicates, per-channel Poisson paths, ...) draws
/// from Rng(split_seed(seed, r)), so streams are independent of thread count
/// and of how many replicates run.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed + (stream + 1) * 0x9e3779b97f4a7c15ull;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Counter-based splittable generator (splitmix64 core) with the sampling
/// helpers the simulators need. All draws are computed from the raw 64-bit
/// stream with fixed arithmetic, so identical seeds give bitwise-identical
/// sequences on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64_next(state_); }

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Exponential with the given rate; uses -log(1-U) so 0 is excluded.
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  /// Standard normal via the polar Box-Muller transform (second value cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pairsim
