#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace metaiot {

/// splitmix64 step; used to derive well-separated seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic substream seed for (master, a) pairs.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t a) {
  std::uint64_t s = master;
  std::uint64_t h = splitmix64(s);
  s = h ^ a;
  return splitmix64(s);
}

inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  return mix_seed(mix_seed(master, a), b);
}

/// Seed tag from a short string literal, so substream ids read like
/// mix_seed(seed, seed_tag("dataset"), j).
inline constexpr std::uint64_t seed_tag(const char* s) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (; *s; ++s) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(*s));
    h *= 1099511628211ULL;
  }
  return h;
}

/// Deterministic random stream: mt19937_64 engine with uniform and Gaussian
/// draws generated from explicit bit manipulation, so sequences are identical
/// across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

  /// Standard normal draw via Box-Muller; the paired value is cached.
  double gaussian() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

  double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace metaiot
