#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace estseq {

// Portable random streams.
//
// Seeds are mixed with SplitMix64 and streams are xoshiro256** generators.
// Both algorithms are fully specified (https://prng.di.unimi.it/), and the
// distributions below are written out by hand instead of relying on the
// implementation-defined <random> distributions, so a seed produces the same
// draws on every platform.

constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Order-dependent mixing of two words; used to derive child seeds.
constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ 0x6A09E667F3BCC909ULL;
  std::uint64_t h = splitmix64(s);
  s = h ^ b;
  return splitmix64(s);
}

// FNV-1a, for turning stream names into tags.
constexpr std::uint64_t hash_tag(std::string_view name) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed = 0) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
    has_spare_ = false;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  std::size_t uniform_index(std::size_t n) {
    // Lemire's multiply-shift; the bias is below 2^-64 * n, far below anything
    // observable at the sizes used here.
    __extension__ using u128 = unsigned __int128;
    const u128 m = static_cast<u128>(next_u64()) * static_cast<u128>(n);
    return static_cast<std::size_t>(m >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
  }

  // A fresh independent seed drawn from this stream.
  std::uint64_t next_seed() { return next_u64(); }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4]{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Named substreams of one run. Each decision kind draws from its own stream so
// that, e.g., the index sequence does not depend on whether noise is enabled.
struct RunStreams {
  explicit RunStreams(std::uint64_t master)
      : index(mix_seed(master, hash_tag("index"))),
        perturbation(mix_seed(master, hash_tag("perturbation"))),
        refresh(mix_seed(master, hash_tag("refresh"))),
        auxiliary(mix_seed(master, hash_tag("auxiliary"))) {}

  RandomStream index;
  RandomStream perturbation;
  RandomStream refresh;
  RandomStream auxiliary;
};

}  // namespace estseq
