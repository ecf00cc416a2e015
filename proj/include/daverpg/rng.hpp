#pragma once

#include <cmath>
#include <cstdint>

namespace daverpg {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator. Each (seed, stream) pair is an independent
/// substream; the n-th draw depends only on (seed, stream, n), so one
/// stream's consumption never perturbs another's.
class CounterRng {
 public:
  CounterRng() : CounterRng(0, 0) {}
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(splitmix64(seed ^ splitmix64(stream + 0x51ed270b0a9cd1edULL))) {}

  std::uint64_t next_u64() {
    return splitmix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_);
  }

  /// Uniform double in [0, 1).
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  /// Exponential with the given mean, strictly positive.
  double exponential(double mean) {
    return -mean * std::log1p(-next_unit());
  }

  double gaussian() {
    // Box-Muller; draws two uniforms per call.
    const double u = 1.0 - next_unit();
    const double v = next_unit();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586477 * v);
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace daverpg
