#pragma once

// Seeded random source with a stable cross-platform stream.
//
// std::mt19937_64 output is fully specified by the standard, but the
// standard *distributions* are not, so every transform (uniform reals,
// bounded ints, gaussians, shuffling) is spelled out here. Two builds on
// different platforms draw identical sequences from the same seed.

#include <cstdint>
#include <random>
#include <vector>

namespace cmd {

// splitmix64 finalizer; used to derive independent child seeds from a base
// seed plus a stream tag (e.g. per-epoch shuffle seeds).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0,1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);

  // Unbiased integer in [0,n) by rejection; n must be >= 1.
  std::uint64_t uniform_below(std::uint64_t n);

  // Standard normal via Box-Muller; generates pairs and caches the spare.
  double normal();

  // Fisher-Yates using uniform_below.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_below(i + 1));
      std::swap(v[i], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace cmd
