#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace hinembed {

// Deterministic random source. All draws go through explicit helpers built on
// the raw mt19937_64 output stream, so sequences are identical across
// platforms and standard-library versions (std::uniform_*_distribution makes
// no such promise).
class Rng {
 public:
  Rng() : engine_(0x9e3779b97f4a7c15ULL), seed_hint_(0x9e3779b97f4a7c15ULL) {}
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_hint_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n) {
    // Lemire's multiply-shift with rejection; unbiased and deterministic.
    std::uint64_t x = engine_();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      std::uint64_t t = -n % n;
      while (lo < t) {
        x = engine_();
        m = static_cast<__uint128_t>(x) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  bool coin() { return (engine_() >> 63) != 0; }

  bool bernoulli(double p) { return uniform01() < p; }

  std::string save_state() const {
    std::ostringstream oss;
    oss << engine_;
    return oss.str();
  }

  void restore_state(const std::string& state) {
    std::istringstream iss(state);
    iss >> engine_;
  }

  // Derives an independent stream for worker `id`; splitmix-style mixing so
  // nearby ids do not correlate.
  Rng fork(std::uint64_t id) const {
    std::uint64_t z = seed_hint_ + 0x9e3779b97f4a7c15ULL * (id + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return Rng(z ^ (z >> 31));
  }

  void reseed(std::uint64_t seed) {
    engine_.seed(seed);
    seed_hint_ = seed;
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_hint_ = 0;
};

}  // namespace hinembed
